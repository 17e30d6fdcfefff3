#include "mlhy/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mlhy {

std::string to_string(SchemeMode mode) {
  switch (mode) {
    case SchemeMode::mlhy: return "mlhy";
    case SchemeMode::uniform_mlpc: return "uniform-mlpc";
    case SchemeMode::dm_only: return "dm-only";
  }
  return "?";
}

SchemeMode scheme_mode_from_string(const std::string& s) {
  if (s == "mlhy") return SchemeMode::mlhy;
  if (s == "uniform-mlpc") return SchemeMode::uniform_mlpc;
  if (s == "dm-only") return SchemeMode::dm_only;
  throw std::invalid_argument("unknown mode: " + s);
}

namespace {

std::uint64_t parse_poly(const nlohmann::json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const std::string s = j.get<std::string>();
  return std::stoull(s, nullptr, 0);
}

std::string poly_hex(std::uint64_t poly) {
  std::ostringstream os;
  os << "0x" << std::hex << poly;
  return os.str();
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.mode = scheme_mode_from_string(j.value("mode", "mlhy"));
  cfg.constellation = j.value("constellation", cfg.constellation);
  cfg.block_length = j.value("N", cfg.block_length);
  if (cfg.block_length < 1 || (cfg.block_length & (cfg.block_length - 1)) != 0)
    throw std::invalid_argument("config: N must be a power of two");
  cfg.rate_bpcu = j.value("rate_bpcu", cfg.rate_bpcu);
  cfg.dsnr_db = j.value("dsnr_db", cfg.dsnr_db);
  cfg.kappa_db = j.value("kappa_db", cfg.kappa_db);
  cfg.n_dm = j.value("n_dm", cfg.n_dm);
  if (cfg.n_dm < 0) throw std::invalid_argument("config: n_dm must be nonnegative");
  cfg.l_enc = j.value("l_enc", cfg.l_enc);
  cfg.l_dec = j.value("l_dec", cfg.l_dec);
  if (cfg.l_enc < 1 || cfg.l_dec < 1) throw std::invalid_argument("config: list sizes");
  if (j.contains("crc") && !j["crc"].is_null()) {
    CrcSpec crc;
    crc.width = j["crc"].at("width").get<int>();
    crc.poly = parse_poly(j["crc"].at("poly"));
    cfg.crc = crc;
  }
  cfg.snr_offset_db = j.value("snr_offset_db", cfg.snr_offset_db);
  cfg.snr_sweep_db = j.value("snr_sweep_db", cfg.snr_sweep_db);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.min_frames = j.value("min_frames", cfg.min_frames);
  cfg.min_errors = j.value("min_errors", cfg.min_errors);
  cfg.max_frames = j.value("max_frames", cfg.max_frames);
  cfg.construction_trials = j.value("construction_trials", cfg.construction_trials);
  if (j.contains("rate_loss")) {
    cfg.rate_loss_block_lengths =
        j["rate_loss"].value("block_lengths", cfg.rate_loss_block_lengths);
    cfg.rate_loss_frames = j["rate_loss"].value("frames", cfg.rate_loss_frames);
  }
  if (j.contains("rcu")) {
    cfg.rcu_trials = j["rcu"].value("trials", cfg.rcu_trials);
    cfg.rcu_grid_step = j["rcu"].value("grid_step", cfg.rcu_grid_step);
    cfg.rcu_pmf_frames = j["rcu"].value("pmf_frames", cfg.rcu_pmf_frames);
  }
  if (j.contains("capacity")) {
    cfg.capacity_target_bpcu = j["capacity"].value("target_bpcu", cfg.capacity_target_bpcu);
    cfg.capacity_lo_db = j["capacity"].value("lo_db", cfg.capacity_lo_db);
    cfg.capacity_hi_db = j["capacity"].value("hi_db", cfg.capacity_hi_db);
  }
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["constellation"] = cfg.constellation;
  j["N"] = cfg.block_length;
  j["rate_bpcu"] = cfg.rate_bpcu;
  j["dsnr_db"] = cfg.dsnr_db;
  j["kappa_db"] = cfg.kappa_db;
  j["n_dm"] = cfg.n_dm;
  j["l_enc"] = cfg.l_enc;
  j["l_dec"] = cfg.l_dec;
  if (cfg.crc)
    j["crc"] = {{"width", cfg.crc->width}, {"poly", poly_hex(cfg.crc->poly)}};
  else
    j["crc"] = nullptr;
  j["snr_offset_db"] = cfg.snr_offset_db;
  j["snr_sweep_db"] = cfg.snr_sweep_db;
  j["seed"] = cfg.seed;
  j["min_frames"] = cfg.min_frames;
  j["min_errors"] = cfg.min_errors;
  j["max_frames"] = cfg.max_frames;
  j["construction_trials"] = cfg.construction_trials;
  j["rate_loss"] = {{"block_lengths", cfg.rate_loss_block_lengths},
                    {"frames", cfg.rate_loss_frames}};
  j["rcu"] = {{"trials", cfg.rcu_trials},
              {"grid_step", cfg.rcu_grid_step},
              {"pmf_frames", cfg.rcu_pmf_frames}};
  j["capacity"] = {{"target_bpcu", cfg.capacity_target_bpcu},
                   {"lo_db", cfg.capacity_lo_db},
                   {"hi_db", cfg.capacity_hi_db}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

std::string canonical_json(const nlohmann::json& j) { return j.dump(); }

std::string content_hash_hex(const std::string& data) {
  // FNV-1a, 64-bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  return content_hash_hex(canonical_json(config_to_json(cfg)));
}

std::string construction_config_hash(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["constellation"] = cfg.constellation;
  j["N"] = cfg.block_length;
  j["rate_bpcu"] = cfg.rate_bpcu;
  j["dsnr_db"] = cfg.dsnr_db;
  j["kappa_db"] = cfg.kappa_db;
  j["snr_offset_db"] = cfg.snr_offset_db;
  j["n_dm"] = cfg.n_dm;
  if (cfg.crc)
    j["crc"] = {{"width", cfg.crc->width}, {"poly", cfg.crc->poly}};
  else
    j["crc"] = nullptr;
  j["seed"] = cfg.seed;
  j["construction_trials"] = cfg.construction_trials;
  return content_hash_hex(canonical_json(j));
}

}  // namespace mlhy
