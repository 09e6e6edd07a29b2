#pragma once

// RunRecord persistence and plot-ready exports. Records hold no volatile
// fields (timestamps and environment live in a separate meta file), so a
// (config, seed) rerun reproduces every export byte for byte.

#include "bisac/io.hpp"
#include "bisac/runner.hpp"

namespace bisac {

inline json sweep_to_records(const SweepResult& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    json trials = json::array();
    for (std::size_t t = 0; t < p.trials.size(); ++t) {
      const TrialMetrics& m = p.trials[t];
      json row{{"trial", t}, {"ok", m.ok}};
      if (m.ok) {
        const dvec v = detail::metric_values(m);
        for (std::size_t k = 0; k < std::size(detail::kMetricNames); ++k)
          row[detail::kMetricNames[k]] = v[k];
      } else {
        row["error"] = m.error;
      }
      trials.push_back(std::move(row));
    }
    json stats;
    for (const auto& [name, st] : p.stats)
      stats[name] = json{{"mean", st.mean}, {"std", st.stddev}};
    points.push_back(json{{"log10_sigma_tau_over_ts", p.log10_sigma_tau_over_ts},
                          {"sigma_tau_s", p.sigma_tau_s},
                          {"failures", p.failures},
                          {"trials", std::move(trials)},
                          {"stats", std::move(stats)}});
  }
  return json{{"kind", "sweep"},
              {"config_hash", hash_hex(r.config_hash)},
              {"seed", r.config.seed},
              {"config", to_json(r.config)},
              {"reference_peak_power", r.reference_peak_power},
              {"points", std::move(points)}};
}

namespace detail {

inline std::string csv_units_comment(const std::string& config_hash) {
  return "# config_hash=" + config_hash +
         " units: sigma_tau_s=s evm_db=dB evm_spread_db=dB ber=ratio uncoded_ber=ratio "
         "pplr_db=dB range_pslr_db=dB range_islr_db=dB az_pslr_db=dB az_islr_db=dB sir_db=dB\n";
}

}  // namespace detail

/// One CSV row per (point, trial).
inline std::string records_to_trials_csv(const json& records) {
  if (records.at("kind") != "sweep") throw config_error("trials CSV needs a sweep record set");
  std::string out = detail::csv_units_comment(records.at("config_hash").get<std::string>());
  out += "log10_sigma_tau_over_ts,sigma_tau_s,trial,ok";
  for (const char* name : detail::kMetricNames) out += std::string(",") + name;
  out += "\n";
  for (const auto& p : records.at("points")) {
    const std::string prefix = format_double(p.at("log10_sigma_tau_over_ts").get<double>()) + "," +
                               format_double(p.at("sigma_tau_s").get<double>());
    for (const auto& t : p.at("trials")) {
      out += prefix + "," + std::to_string(t.at("trial").get<std::size_t>()) + "," +
             (t.at("ok").get<bool>() ? "1" : "0");
      for (const char* name : detail::kMetricNames)
        out += "," + (t.contains(name) ? format_double(t.at(name).get<double>()) : std::string());
      out += "\n";
    }
  }
  return out;
}

/// One CSV row per sweep point with mean and standard deviation columns.
inline std::string records_to_summary_csv(const json& records) {
  if (records.at("kind") != "sweep") throw config_error("summary CSV needs a sweep record set");
  std::string out = detail::csv_units_comment(records.at("config_hash").get<std::string>());
  out += "log10_sigma_tau_over_ts,sigma_tau_s,trials,failures";
  for (const char* name : detail::kMetricNames)
    out += std::string(",") + name + "_mean," + name + "_std";
  out += "\n";
  for (const auto& p : records.at("points")) {
    out += format_double(p.at("log10_sigma_tau_over_ts").get<double>()) + "," +
           format_double(p.at("sigma_tau_s").get<double>()) + "," +
           std::to_string(p.at("trials").size()) + "," +
           std::to_string(p.at("failures").get<std::size_t>());
    for (const char* name : detail::kMetricNames) {
      const auto& st = p.at("stats").at(name);
      out += "," + format_double(st.at("mean").get<double>()) + "," +
             format_double(st.at("std").get<double>());
    }
    out += "\n";
  }
  return out;
}

inline json replay_to_records(const ReplayResult& r) {
  json channels = json::array();
  const std::size_t nch = r.reported_cfo_hz.size();
  for (std::size_t n = 0; n < nch; ++n) {
    channels.push_back(json{{"channel", n},
                            {"residual_sto_ns", r.residual_sto_s[n] * 1e9},
                            {"cfo_khz", r.reported_cfo_hz[n] * 1e-3},
                            {"sfo_ppm", r.reported_sfo[n] * 1e6},
                            {"pilot_snr_db", r.pilot_snr_db[n]},
                            {"true_abe_delay_ns", r.true_abe_delay_s[n] * 1e9},
                            {"coarse_sto_ns", r.sync.sto_s[n] * 1e9}});
  }
  return json{{"kind", "replay"},
              {"config_hash", hash_hex(r.config_hash)},
              {"seed", r.config.seed},
              {"config", to_json(r.config)},
              {"sync",
               json{{"channels", std::move(channels)},
                    {"global",
                     json{{"sto_ns", r.sync.sto_mimo_s * 1e9},
                          {"cfo_khz",
                           (r.sync.cfo_mimo_hz +
                            [&] {
                              double acc = 0.0;
                              for (std::size_t n = 0; n < nch; ++n)
                                acc += r.reported_cfo_hz[n] - r.sync.cfo_hz[n];
                              return acc / static_cast<double>(nch);
                            }()) *
                               1e-3},
                          {"sfo_ppm", r.sync.sfo_mimo * 1e6}}}}},
              {"comm",
               json{{"evm_zf_ch0_db", r.evm_zf_ch0.mean_db},
                    {"evm_zf_ch0_spread_db", r.evm_zf_ch0.spread_db},
                    {"evm_mrc_db", r.evm_mrc.mean_db},
                    {"evm_mrc_spread_db", r.evm_mrc.spread_db},
                    {"ber", r.ber},
                    {"uncoded_ber", r.uncoded_ber},
                    {"decode_converged", r.decode_converged},
                    {"genie", r.config.genie_decoding}}},
              {"radar",
               json{{"los_doa_deg", rad2deg(r.los_doa_rad)},
                    {"los_azimuth_bin", r.los_azimuth_bin},
                    {"peak_range_bin", r.peak_range_bin},
                    {"azimuth_points", r.azimuth_grid_rad.size()}}}};
}

inline std::string constellation_csv(const cvec& points) {
  std::string out = "cell,i,q\n";
  for (std::size_t i = 0; i < points.size(); ++i)
    out += std::to_string(i) + "," + format_double(points[i].real()) + "," +
           format_double(points[i].imag()) + "\n";
  return out;
}

inline std::string range_doppler_csv(const RangeDopplerImage& img) {
  std::string out = "range_bin,doppler_bin,range_m,doppler_hz,mag_db\n";
  double peak = 0.0;
  for (const auto& v : img.values) peak = std::max(peak, std::norm(v));
  for (std::size_t k = 0; k < img.num_doppler; ++k)
    for (std::size_t l = 0; l < img.num_range; ++l)
      out += std::to_string(l) + "," + std::to_string(k) + "," +
             format_double(img.range_axis_m[l]) + "," + format_double(img.doppler_axis_hz[k]) +
             "," + format_double(db10_clamped(std::norm(img.at(l, k)) / peak)) + "\n";
  return out;
}

inline std::string range_azimuth_csv(const ImageCut& cut) {
  std::string out = "range_bin,azimuth_bin,range_m,azimuth_deg,mag_db\n";
  double peak = 0.0;
  for (double v : cut.power) peak = std::max(peak, v);
  for (std::size_t l = 0; l < cut.num_range; ++l)
    for (std::size_t s = 0; s < cut.num_azimuth; ++s)
      out += std::to_string(l) + "," + std::to_string(s) + "," +
             format_double(cut.range_axis_m[l]) + "," +
             format_double(rad2deg(cut.azimuth_axis_rad[s])) + "," +
             format_double(db10_clamped(cut.at(l, s) / peak)) + "\n";
  return out;
}

/// Flat little-endian float32 magnitude (dB, peak-normalized) with a JSON
/// axis sidecar. Order: azimuth fastest, then range, then Doppler.
inline void write_radar_cube(const RadarCube& cube, const std::filesystem::path& path,
                             const std::string& config_hash) {
  double peak = 0.0;
  for (const auto& v : cube.values) peak = std::max(peak, std::norm(v));
  std::vector<float> mag(cube.values.size());
  for (std::size_t i = 0; i < cube.values.size(); ++i)
    mag[i] = static_cast<float>(db10_clamped(std::norm(cube.values[i]) / std::max(peak, 1e-300)));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error(path.string(), "cannot open for writing");
  f.write(reinterpret_cast<const char*>(mag.data()),
          static_cast<std::streamsize>(mag.size() * sizeof(float)));
  if (!f) throw io_error(path.string(), "write failed");
  json side{{"format", "float32-le-magnitude-db"},
            {"order", "azimuth,range,doppler (azimuth fastest)"},
            {"num_range", cube.num_range},
            {"num_doppler", cube.num_doppler},
            {"num_azimuth", cube.num_azimuth},
            {"range_axis_m", cube.range_axis_m},
            {"doppler_axis_hz", cube.doppler_axis_hz},
            {"azimuth_axis_rad", cube.azimuth_axis_rad},
            {"config_hash", config_hash}};
  write_json_file(path.string() + ".json", side);
}

inline json load_records(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error(path.string(), "cannot open records");
  return json::parse(f);
}

enum class ExportFormat { csv, json_fmt, iqbin };

/// Re-emits a stored record set. CSV and JSON work for every record kind;
/// iqbin needs records that reference stored I/Q streams.
inline std::vector<std::filesystem::path> export_records(const json& records,
                                                         ExportFormat format,
                                                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  switch (format) {
    case ExportFormat::json_fmt: {
      const auto p = out_dir / "records.json";
      write_json_file(p, records);
      written.push_back(p);
      break;
    }
    case ExportFormat::csv: {
      if (records.at("kind") == "sweep") {
        const auto t = out_dir / "trials.csv";
        write_text_file(t, records_to_trials_csv(records));
        const auto s = out_dir / "summary.csv";
        write_text_file(s, records_to_summary_csv(records));
        written.push_back(t);
        written.push_back(s);
      } else {
        // Replay: flatten the sync table.
        std::string out =
            "# config_hash=" + records.at("config_hash").get<std::string>() +
            " units: residual_sto_ns=ns cfo_khz=kHz sfo_ppm=ppm pilot_snr_db=dB\n";
        out += "channel,residual_sto_ns,cfo_khz,sfo_ppm,pilot_snr_db,true_abe_delay_ns\n";
        for (const auto& ch : records.at("sync").at("channels"))
          out += std::to_string(ch.at("channel").get<std::size_t>()) + "," +
                 format_double(ch.at("residual_sto_ns").get<double>()) + "," +
                 format_double(ch.at("cfo_khz").get<double>()) + "," +
                 format_double(ch.at("sfo_ppm").get<double>()) + "," +
                 format_double(ch.at("pilot_snr_db").get<double>()) + "," +
                 format_double(ch.at("true_abe_delay_ns").get<double>()) + "\n";
        const auto p = out_dir / "sync_table.csv";
        write_text_file(p, out);
        written.push_back(p);
      }
      break;
    }
    case ExportFormat::iqbin: {
      if (!records.contains("streams"))
        throw config_error("record set carries no I/Q stream references (iqbin export)");
      for (const auto& s : records.at("streams")) {
        const std::filesystem::path src = s.get<std::string>();
        IqSidecar meta;
        const cvec data = read_iq_binary(src, &meta);
        const auto dst = out_dir / src.filename();
        write_iq_binary(dst, data, meta);
        written.push_back(dst);
      }
      break;
    }
  }
  return written;
}

}  // namespace bisac
