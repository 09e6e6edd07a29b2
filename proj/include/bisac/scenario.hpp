#pragma once

// Scenario configuration: the JSON schema, strict validation (unknown keys
// rejected), profile defaults, and the canonical config hash.

#include <optional>

#include "bisac/impairments.hpp"
#include "bisac/io.hpp"
#include "bisac/window.hpp"

namespace bisac {

struct PathSpec {
  bool is_los = false;
  double attenuation = 1.0;
  double tx_range_m = 0.0;  // transmitter -> scatterer (LoS: full path)
  double rx_range_m = 0.0;  // scatterer -> receiver (LoS: 0)
  double doppler_hz = 0.0;
  double dod_deg = 0.0;
  double doa_deg = 0.0;

  Path to_path() const {
    Path p;
    p.is_los = is_los;
    p.attenuation = attenuation;
    p.tx_delay_s = tx_range_m / kSpeedOfLight;
    p.rx_delay_s = rx_range_m / kSpeedOfLight;
    p.doppler_hz = doppler_hz;
    p.dod_rad = deg2rad(dod_deg);
    p.doa_rad = deg2rad(doa_deg);
    return p;
  }
};

struct ImpairmentConfig {
  double sto_ns = 0.0;
  double cfo_hz = 0.0;
  double sfo_ppm = 0.0;
  bool common_phase_random = true;
  double common_phase_deg = 0.0;
  bool noise_enabled = false;
  double noise_figure_db = 10.0;
  double temperature_k = 290.0;
  std::optional<double> los_snr_db;  // when set, path gains are scaled to hit it
  std::string abe_profile = "ideal";
  std::string afe_profile = "ideal";
};

struct WindowConfig {
  std::string range = "rectangular";
  std::string doppler = "rectangular";
  std::string azimuth = "rectangular";
  double sidelobe_db = 100.0;
};

struct SweepConfig {
  std::string variable = "sigma_tau";
  double log10_min = -6.0;
  double log10_max = 3.0;
  double log10_step = 0.25;
  std::size_t trials = 100;
  double delay_phase_carrier_hz = 3.68e9;  // digital-IF reference for delay phases
  double sir_peak_to_floor_db = 47.0;      // image noise floor for the SIR scenario
  double sir_window_sidelobe_db = 100.0;   // Chebyshev suppression for the SIR images
};

struct ScenarioConfig {
  std::string profile = "desk";  // desk | full | custom
  std::uint64_t seed = 1;
  bool genie_decoding = false;
  OfdmConfig ofdm = OfdmConfig::desk_profile();
  double carrier_frequency_hz = 27.5e9;
  std::size_t tx_elements = 4;
  std::size_t rx_elements = 8;
  std::vector<PathSpec> paths;
  ImpairmentConfig impairments;
  WindowConfig windows;
  std::size_t azimuth_points = 0;  // 0 -> 4x rx_elements
  SweepConfig sweep;

  static ScenarioConfig defaults(const std::string& profile_name = "desk") {
    ScenarioConfig c;
    c.profile = profile_name;
    if (profile_name == "full")
      c.ofdm = OfdmConfig::full_profile();
    else if (profile_name == "desk")
      c.ofdm = OfdmConfig::desk_profile();
    else
      throw config_error("unknown profile: " + profile_name);
    // Desk-scale two-path scene: LoS reference plus one reflector.
    PathSpec los;
    los.is_los = true;
    los.attenuation = 1.0;
    los.tx_range_m = 0.55;
    los.dod_deg = 0.0;
    los.doa_deg = 3.0;
    PathSpec refl;
    refl.attenuation = 0.5;
    refl.tx_range_m = 0.40;
    refl.rx_range_m = 0.30;
    refl.dod_deg = 30.0;
    refl.doa_deg = -20.0;
    c.paths = {los, refl};
    return c;
  }

  std::size_t azimuth_grid_points() const {
    return azimuth_points ? azimuth_points : 4 * rx_elements;
  }

  PathSet path_set() const {
    PathSet ps;
    for (const auto& s : paths) ps.paths.push_back(s.to_path());
    ps.validate();
    return ps;
  }

  void validate() const {
    ofdm.validate();
    if (tx_elements == 0 || rx_elements == 0) throw config_error("element counts must be positive");
    if (!(carrier_frequency_hz > 0.0)) throw config_error("carrier frequency must be positive");
    if (paths.empty()) throw config_error("at least the LoS path must be configured");
    path_set();
    if (sweep.trials == 0) throw config_error("sweep needs at least one trial per point");
    if (!(sweep.log10_step > 0.0)) throw config_error("sweep step must be positive");
    if (sweep.log10_max < sweep.log10_min) throw config_error("sweep range is empty");
    if (std::fabs(impairments.sfo_ppm) >= 1000.0)
      throw config_error("SFO must stay in the ppm regime");
  }
};

// --- JSON binding with unknown-key rejection --------------------------------

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw config_error("unknown key \"" + it.key() + "\" in " + where);
  }
}

template <typename T>
inline void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline json to_json(const CodeSpec& c) {
  return json{{"kind", c.kind == CodeKind::ldpc ? "ldpc" : "none"},
              {"rate_num", c.rate_num},
              {"rate_den", c.rate_den},
              {"block_length_bits", c.block_length_bits},
              {"bp_iterations", c.bp_iterations}};
}

inline CodeSpec code_from_json(const json& j) {
  detail::check_keys(j, {"kind", "rate_num", "rate_den", "block_length_bits", "bp_iterations"},
                     "ofdm.code");
  CodeSpec c;
  std::string kind = "ldpc";
  detail::get_if(j, "kind", kind);
  if (kind == "ldpc")
    c.kind = CodeKind::ldpc;
  else if (kind == "none") {
    c.kind = CodeKind::none;
    c.rate_num = c.rate_den = 1;
  } else
    throw config_error("unknown code kind: " + kind);
  detail::get_if(j, "rate_num", c.rate_num);
  detail::get_if(j, "rate_den", c.rate_den);
  detail::get_if(j, "block_length_bits", c.block_length_bits);
  detail::get_if(j, "bp_iterations", c.bp_iterations);
  return c;
}

inline json to_json(const OfdmConfig& c) {
  return json{{"num_subcarriers", c.num_subcarriers},
              {"num_symbols", c.num_symbols},
              {"cp_length", c.cp_length},
              {"bandwidth_hz", c.bandwidth_hz},
              {"pilot_subcarrier_spacing", c.pilot_subcarrier_spacing},
              {"pilot_symbol_spacing", c.pilot_symbol_spacing},
              {"code", to_json(c.code)}};
}

inline OfdmConfig ofdm_from_json(const json& j) {
  detail::check_keys(j,
                     {"num_subcarriers", "num_symbols", "cp_length", "bandwidth_hz",
                      "pilot_subcarrier_spacing", "pilot_symbol_spacing", "code"},
                     "ofdm");
  OfdmConfig c;
  detail::get_if(j, "num_subcarriers", c.num_subcarriers);
  detail::get_if(j, "num_symbols", c.num_symbols);
  detail::get_if(j, "cp_length", c.cp_length);
  detail::get_if(j, "bandwidth_hz", c.bandwidth_hz);
  detail::get_if(j, "pilot_subcarrier_spacing", c.pilot_subcarrier_spacing);
  detail::get_if(j, "pilot_symbol_spacing", c.pilot_symbol_spacing);
  if (j.contains("code")) c.code = code_from_json(j.at("code"));
  return c;
}

inline json to_json(const PathSpec& p) {
  return json{{"is_los", p.is_los},       {"attenuation", p.attenuation},
              {"tx_range_m", p.tx_range_m}, {"rx_range_m", p.rx_range_m},
              {"doppler_hz", p.doppler_hz}, {"dod_deg", p.dod_deg},
              {"doa_deg", p.doa_deg}};
}

inline PathSpec path_from_json(const json& j) {
  detail::check_keys(
      j, {"is_los", "attenuation", "tx_range_m", "rx_range_m", "doppler_hz", "dod_deg", "doa_deg"},
      "paths[]");
  PathSpec p;
  detail::get_if(j, "is_los", p.is_los);
  detail::get_if(j, "attenuation", p.attenuation);
  detail::get_if(j, "tx_range_m", p.tx_range_m);
  detail::get_if(j, "rx_range_m", p.rx_range_m);
  detail::get_if(j, "doppler_hz", p.doppler_hz);
  detail::get_if(j, "dod_deg", p.dod_deg);
  detail::get_if(j, "doa_deg", p.doa_deg);
  return p;
}

inline json to_json(const ImpairmentConfig& c) {
  json j{{"sto_ns", c.sto_ns},
         {"cfo_hz", c.cfo_hz},
         {"sfo_ppm", c.sfo_ppm},
         {"common_phase_random", c.common_phase_random},
         {"common_phase_deg", c.common_phase_deg},
         {"noise_enabled", c.noise_enabled},
         {"noise_figure_db", c.noise_figure_db},
         {"temperature_k", c.temperature_k},
         {"abe_profile", c.abe_profile},
         {"afe_profile", c.afe_profile}};
  if (c.los_snr_db) j["los_snr_db"] = *c.los_snr_db;
  return j;
}

inline ImpairmentConfig impairments_from_json(const json& j) {
  detail::check_keys(j,
                     {"sto_ns", "cfo_hz", "sfo_ppm", "common_phase_random", "common_phase_deg",
                      "noise_enabled", "noise_figure_db", "temperature_k", "los_snr_db",
                      "abe_profile", "afe_profile"},
                     "impairments");
  ImpairmentConfig c;
  detail::get_if(j, "sto_ns", c.sto_ns);
  detail::get_if(j, "cfo_hz", c.cfo_hz);
  detail::get_if(j, "sfo_ppm", c.sfo_ppm);
  detail::get_if(j, "common_phase_random", c.common_phase_random);
  detail::get_if(j, "common_phase_deg", c.common_phase_deg);
  detail::get_if(j, "noise_enabled", c.noise_enabled);
  detail::get_if(j, "noise_figure_db", c.noise_figure_db);
  detail::get_if(j, "temperature_k", c.temperature_k);
  if (j.contains("los_snr_db") && !j.at("los_snr_db").is_null())
    c.los_snr_db = j.at("los_snr_db").get<double>();
  detail::get_if(j, "abe_profile", c.abe_profile);
  detail::get_if(j, "afe_profile", c.afe_profile);
  return c;
}

inline json to_json(const WindowConfig& c) {
  return json{{"range", c.range},
              {"doppler", c.doppler},
              {"azimuth", c.azimuth},
              {"sidelobe_db", c.sidelobe_db}};
}

inline WindowConfig windows_from_json(const json& j) {
  detail::check_keys(j, {"range", "doppler", "azimuth", "sidelobe_db"}, "windows");
  WindowConfig c;
  detail::get_if(j, "range", c.range);
  detail::get_if(j, "doppler", c.doppler);
  detail::get_if(j, "azimuth", c.azimuth);
  detail::get_if(j, "sidelobe_db", c.sidelobe_db);
  return c;
}

inline json to_json(const SweepConfig& c) {
  return json{{"variable", c.variable},
              {"log10_min", c.log10_min},
              {"log10_max", c.log10_max},
              {"log10_step", c.log10_step},
              {"trials", c.trials},
              {"delay_phase_carrier_hz", c.delay_phase_carrier_hz},
              {"sir_peak_to_floor_db", c.sir_peak_to_floor_db},
              {"sir_window_sidelobe_db", c.sir_window_sidelobe_db}};
}

inline SweepConfig sweep_from_json(const json& j) {
  detail::check_keys(j,
                     {"variable", "log10_min", "log10_max", "log10_step", "trials",
                      "delay_phase_carrier_hz", "sir_peak_to_floor_db", "sir_window_sidelobe_db"},
                     "sweep");
  SweepConfig c;
  detail::get_if(j, "variable", c.variable);
  if (c.variable != "sigma_tau") throw config_error("only the sigma_tau sweep is defined");
  detail::get_if(j, "log10_min", c.log10_min);
  detail::get_if(j, "log10_max", c.log10_max);
  detail::get_if(j, "log10_step", c.log10_step);
  detail::get_if(j, "trials", c.trials);
  detail::get_if(j, "delay_phase_carrier_hz", c.delay_phase_carrier_hz);
  detail::get_if(j, "sir_peak_to_floor_db", c.sir_peak_to_floor_db);
  detail::get_if(j, "sir_window_sidelobe_db", c.sir_window_sidelobe_db);
  return c;
}

inline json to_json(const ScenarioConfig& c) {
  json paths = json::array();
  for (const auto& p : c.paths) paths.push_back(to_json(p));
  return json{{"profile", c.profile},
              {"seed", c.seed},
              {"genie_decoding", c.genie_decoding},
              {"ofdm", to_json(c.ofdm)},
              {"carrier_frequency_hz", c.carrier_frequency_hz},
              {"tx_elements", c.tx_elements},
              {"rx_elements", c.rx_elements},
              {"paths", paths},
              {"impairments", to_json(c.impairments)},
              {"windows", to_json(c.windows)},
              {"azimuth_points", c.azimuth_points},
              {"sweep", to_json(c.sweep)}};
}

inline ScenarioConfig scenario_from_json(const json& j) {
  detail::check_keys(j,
                     {"profile", "seed", "genie_decoding", "ofdm", "carrier_frequency_hz",
                      "tx_elements", "rx_elements", "paths", "impairments", "windows",
                      "azimuth_points", "sweep"},
                     "scenario");
  std::string profile = "desk";
  detail::get_if(j, "profile", profile);
  ScenarioConfig c = ScenarioConfig::defaults(profile == "custom" ? "desk" : profile);
  c.profile = profile;
  detail::get_if(j, "seed", c.seed);
  detail::get_if(j, "genie_decoding", c.genie_decoding);
  if (j.contains("ofdm")) c.ofdm = ofdm_from_json(j.at("ofdm"));
  detail::get_if(j, "carrier_frequency_hz", c.carrier_frequency_hz);
  detail::get_if(j, "tx_elements", c.tx_elements);
  detail::get_if(j, "rx_elements", c.rx_elements);
  if (j.contains("paths")) {
    c.paths.clear();
    for (const auto& p : j.at("paths")) c.paths.push_back(path_from_json(p));
  }
  if (j.contains("impairments")) c.impairments = impairments_from_json(j.at("impairments"));
  if (j.contains("windows")) c.windows = windows_from_json(j.at("windows"));
  detail::get_if(j, "azimuth_points", c.azimuth_points);
  if (j.contains("sweep")) c.sweep = sweep_from_json(j.at("sweep"));
  c.validate();
  return c;
}

inline std::uint64_t scenario_hash(const ScenarioConfig& c) {
  return canonical_json_hash(to_json(c));
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw io_error(path.string(), "cannot open scenario config");
  json j;
  try {
    j = json::parse(f);
  } catch (const std::exception& e) {
    throw config_error("config parse error in " + path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace bisac
