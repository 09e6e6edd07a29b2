// Command-line front end: `params` (derived ISAC parameters), `sweep`
// (sigma_tau Monte-Carlo robustness sweep), `replay` (end-to-end scenario
// run), and `export` (re-emit stored record sets).
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure threshold
// exceeded.

#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "bisac/bisac.hpp"

namespace {

using namespace bisac;

ScenarioConfig load_config(const std::string& config_path, const std::string& profile,
                           std::uint64_t seed, bool seed_set, std::size_t trials, bool genie) {
  ScenarioConfig cfg =
      config_path.empty() ? ScenarioConfig::defaults(profile) : load_scenario(config_path);
  if (config_path.empty()) cfg.profile = profile;
  if (seed_set) cfg.seed = seed;
  if (trials) cfg.sweep.trials = trials;
  if (genie) cfg.genie_decoding = true;
  cfg.validate();
  return cfg;
}

json run_meta() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return json{{"timestamp_unix_ms",
               std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
              {"compiler",
#if defined(__clang__)
               std::string("clang ") + __clang_version__
#elif defined(__GNUC__)
               std::string("gcc ") + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__)
#else
               "unknown"
#endif
              },
              {"platform",
#if defined(__linux__)
               "linux"
#elif defined(__APPLE__)
               "darwin"
#else
               "other"
#endif
              }};
}

void print_params(const ScenarioConfig& cfg, const std::string& json_out) {
  const IsacParams p = derive_isac_params(cfg.ofdm, cfg.rx_elements, cfg.ofdm.code.rate(),
                                          cfg.ofdm.bits_per_cell());
  char line[128];
  auto row = [&](const char* name, const char* fmt, double v, const char* unit) {
    std::snprintf(line, sizeof line, "  %-18s %s %s", name, fmt, unit);
    char out[160];
    std::snprintf(out, sizeof out, line, v);
    std::cout << out << "\n";
  };
  std::cout << "ISAC performance parameters (" << cfg.profile << " profile, N_rx="
            << cfg.rx_elements << ", rate " << cfg.ofdm.code.rate_num << "/"
            << cfg.ofdm.code.rate_den << "):\n";
  row("R_comm", "%.2f", p.comm_rate_bps / 1e9, "Gbit/s");
  row("G_p", "%.2f", p.processing_gain_db, "dB");
  row("Delta_R", "%.2f", p.range_resolution_m, "m");
  row("R_max_ua", "%.2f", p.max_unambiguous_range_m, "m");
  row("R_max_ISI", "%.2f", p.max_isi_free_range_m, "m");
  row("Delta_f_D", "%.0f", p.doppler_resolution_hz, "Hz");
  row("f_D_max_ua", "+/-%.0f", p.max_unambiguous_doppler_hz / 1e3, "kHz");
  row("f_D_max_ICI", "+/-%.0f", p.max_ici_free_doppler_hz / 1e3, "kHz");
  row("Delta_phi_rx", "%.2f", rad2deg(p.azimuth_resolution_rad), "deg");
  row("phi_rx_max_ua", "+/-%.0f", rad2deg(p.max_unambiguous_azimuth_rad), "deg");
  if (!json_out.empty()) {
    write_json_file(json_out,
                    json{{"comm_rate_bps", p.comm_rate_bps},
                         {"processing_gain_db", p.processing_gain_db},
                         {"range_resolution_m", p.range_resolution_m},
                         {"max_unambiguous_range_m", p.max_unambiguous_range_m},
                         {"max_isi_free_range_m", p.max_isi_free_range_m},
                         {"doppler_resolution_hz", p.doppler_resolution_hz},
                         {"max_unambiguous_doppler_hz", p.max_unambiguous_doppler_hz},
                         {"max_ici_free_doppler_hz", p.max_ici_free_doppler_hz},
                         {"azimuth_resolution_rad", p.azimuth_resolution_rad},
                         {"max_unambiguous_azimuth_rad", p.max_unambiguous_azimuth_rad}});
  }
}

int do_sweep(const ScenarioConfig& cfg, const std::string& out_dir, unsigned threads,
             double failure_threshold) {
  const SweepResult res = run_sweep(cfg, threads);
  std::filesystem::create_directories(out_dir);
  const json records = sweep_to_records(res);
  write_json_file(std::filesystem::path(out_dir) / "records.json", records);
  write_text_file(std::filesystem::path(out_dir) / "trials.csv", records_to_trials_csv(records));
  write_text_file(std::filesystem::path(out_dir) / "summary.csv",
                  records_to_summary_csv(records));
  write_json_file(std::filesystem::path(out_dir) / "run_meta.json", run_meta());
  const double failure_rate =
      res.total_trials() ? static_cast<double>(res.total_failures()) /
                               static_cast<double>(res.total_trials())
                         : 0.0;
  std::cout << "sweep: " << res.points.size() << " points x " << cfg.sweep.trials
            << " trials, " << res.total_failures() << " failures ("
            << format_double(100.0 * failure_rate) << "%), results in " << out_dir << "\n";
  return failure_rate > failure_threshold ? 3 : 0;
}

int do_replay(const ScenarioConfig& cfg, const std::string& out_dir, bool dump_cube,
              bool dump_iq) {
  const ReplayResult res = run_scenario_replay(cfg);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  json records = replay_to_records(res);

  write_text_file(dir / "constellation_zf_ch0.csv", constellation_csv(res.constellation_zf));
  write_text_file(dir / "constellation_mrc.csv", constellation_csv(res.constellation_mrc));
  write_text_file(dir / "range_doppler_ch0.csv", range_doppler_csv(res.rd_image_ch0));
  write_text_file(dir / "range_azimuth.csv", range_azimuth_csv(res.zero_doppler));

  json gt{{"seed", res.realization.seed},
          {"sto_ns", res.realization.impairments.sto_s * 1e9},
          {"cfo_hz", res.realization.impairments.cfo_hz},
          {"sfo_ppm", res.realization.impairments.normalized_sfo * 1e6},
          {"common_phase_rad", res.realization.impairments.common_phase_rad},
          {"abe_delays_ns", json::array()},
          {"paths", json::array()}};
  for (const auto& r : res.realization.impairments.abe)
    gt["abe_delays_ns"].push_back(r.dominant_delay_s * 1e9);
  for (const auto& p : res.realization.paths.paths)
    gt["paths"].push_back(json{{"is_los", p.is_los},
                               {"attenuation", p.attenuation},
                               {"tx_delay_ns", p.tx_delay_s * 1e9},
                               {"rx_delay_ns", p.rx_delay_s * 1e9},
                               {"doppler_hz", p.doppler_hz},
                               {"dod_deg", rad2deg(p.dod_rad)},
                               {"doa_deg", rad2deg(p.doa_rad)}});
  write_json_file(dir / "ground_truth.json", gt);

  if (dump_cube) {
    const UlaGeometry rx_geom = UlaGeometry::make(cfg.rx_elements, cfg.carrier_frequency_hz);
    const Window wr =
        make_window(cfg.windows.range, cfg.ofdm.num_subcarriers, cfg.windows.sidelobe_db);
    const Window wd =
        make_window(cfg.windows.doppler, cfg.ofdm.num_symbols, cfg.windows.sidelobe_db);
    const Window wa =
        make_window(cfg.windows.azimuth, cfg.rx_elements, cfg.windows.sidelobe_db);
    std::vector<RangeDopplerImage> images;
    images.reserve(res.radar_cfr.d.size());
    for (const auto& d : res.radar_cfr.d)
      images.push_back(range_doppler_image(d, cfg.ofdm, wr, wd));
    const RadarCube cube = doa_cube(images, rx_geom, res.azimuth_grid_rad, wa);
    write_radar_cube(cube, dir / "cube.f32", hash_hex(res.config_hash));
  }
  if (dump_iq) {
    json streams = json::array();
    for (std::size_t ch = 0; ch < res.realization.rx.size(); ++ch) {
      const auto p = dir / ("rx_ch" + std::to_string(ch) + ".iqf32");
      IqSidecar meta;
      meta.sample_rate_hz = res.realization.sample_rate_hz;
      meta.channel_id = static_cast<int>(ch);
      meta.config_hash = hash_hex(res.config_hash);
      write_iq_binary(p, res.realization.rx[ch], meta);
      streams.push_back(p.string());
    }
    records["streams"] = streams;
  }
  write_json_file(dir / "records.json", records);
  write_json_file(dir / "run_meta.json", run_meta());

  std::cout << "replay: EVM(ZF ch0) " << format_double(res.evm_zf_ch0.mean_db) << " dB, EVM(MRC) "
            << format_double(res.evm_mrc.mean_db) << " dB, BER " << format_double(res.ber)
            << ", LoS azimuth bin " << res.los_azimuth_bin << ", peak range bin "
            << res.peak_range_bin << "; artifacts in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bisac: bistatic MIMO-OFDM ISAC link and imaging simulator"};
  app.require_subcommand(1);

  std::string config_path, profile = "desk", out_dir = "out", json_out, records_path,
              format = "csv";
  std::uint64_t seed = 1;
  bool genie = false, dump_cube = false, dump_iq = false;
  std::size_t trials = 0;
  unsigned threads = 0;
  double failure_threshold = 0.1;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--config", config_path, "scenario config JSON");
    cmd->add_option("--profile", profile, "desk | full")->check(CLI::IsMember({"desk", "full"}));
    cmd->add_option("--seed", seed, "master seed");
    if (with_out) cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* params = app.add_subcommand("params", "print derived ISAC performance parameters");
  add_common(params, false);
  params->add_option("--json", json_out, "also write the parameters as JSON");

  CLI::App* sweep = app.add_subcommand("sweep", "run the sigma_tau Monte-Carlo sweep");
  add_common(sweep, true);
  sweep->add_option("--trials", trials, "trials per sweep point");
  sweep->add_option("--threads", threads, "worker threads (default: hardware)");
  sweep->add_option("--failure-threshold", failure_threshold,
                    "failure rate above which the exit code is 3");
  sweep->add_flag("--genie", genie, "genie-aided decoding (replay semantics)");

  CLI::App* replay = app.add_subcommand("replay", "run one end-to-end scenario");
  add_common(replay, true);
  replay->add_flag("--genie", genie, "genie-aided decoding for the radar chain");
  replay->add_flag("--cube", dump_cube, "note about full cube export");
  replay->add_flag("--dump-iq", dump_iq, "write per-channel receive I/Q streams");

  CLI::App* exp = app.add_subcommand("export", "re-emit a stored record set");
  exp->add_option("--records", records_path, "records.json path")->required();
  exp->add_option("--format", format, "csv | json | iqbin")
      ->check(CLI::IsMember({"csv", "json", "iqbin"}));
  exp->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (params->parsed()) {
      print_params(load_config(config_path, profile, seed, params->count("--seed") > 0, 0, false),
                   json_out);
      return 0;
    }
    if (sweep->parsed())
      return do_sweep(load_config(config_path, profile, seed, sweep->count("--seed") > 0, trials,
                                  genie),
                      out_dir, threads, failure_threshold);
    if (replay->parsed())
      return do_replay(load_config(config_path, profile, seed, replay->count("--seed") > 0, 0,
                                   genie),
                       out_dir, dump_cube, dump_iq);
    if (exp->parsed()) {
      const json records = load_records(records_path);
      ExportFormat f = format == "csv" ? ExportFormat::csv
                       : format == "json" ? ExportFormat::json_fmt
                                          : ExportFormat::iqbin;
      const auto written = export_records(records, f, out_dir);
      for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
      return 0;
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
