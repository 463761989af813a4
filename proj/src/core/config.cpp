#include "core/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace adast {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    require(pos == v.size(), ErrorKind::Config, "key '", key, "': trailing characters in '", v, "'");
    return x;
  } catch (const AdastError&) {
    throw;
  } catch (...) {
    raise(ErrorKind::Config, "key '", key, "': cannot parse '", v, "' as a number");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && ptr == v.data() + v.size(), ErrorKind::Config, "key '", key,
          "': cannot parse '", v, "' as an integer");
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  require(ec == std::errc() && ptr == v.data() + v.size(), ErrorKind::Config, "key '", key,
          "': cannot parse '", v, "' as an unsigned integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  raise(ErrorKind::Config, "key '", key, "': expected true/false, got '", v, "'");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T, typename Fmt>
std::string fmt_list(const std::vector<T>& values, Fmt fmt) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += fmt(values[i]);
  }
  return out;
}

struct Entry {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::map<std::string, Entry> build_registry() {
  std::map<std::string, Entry> reg;
  auto add_double = [&reg](const std::string& key, double ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*field = parse_double(k, v);
        },
        [field](const ExperimentConfig& c) { return fmt_double(c.*field); }};
  };
  auto add_int = [&reg](const std::string& key, int ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*field = parse_int(k, v);
        },
        [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
  };
  auto add_u64 = [&reg](const std::string& key, uint64_t ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*field = parse_u64(k, v);
        },
        [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
  };
  auto add_bool = [&reg](const std::string& key, bool ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*field = parse_bool(k, v);
        },
        [field](const ExperimentConfig& c) { return c.*field ? "true" : "false"; }};
  };
  auto add_string = [&reg](const std::string& key, std::string ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string&, const std::string& v) { c.*field = v; },
        [field](const ExperimentConfig& c) { return c.*field; }};
  };
  auto add_double_list = [&reg](const std::string& key,
                                std::vector<double> ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
          std::vector<double> out;
          for (const auto& part : split_csv(v)) out.push_back(parse_double(k, part));
          c.*field = std::move(out);
        },
        [field](const ExperimentConfig& c) { return fmt_list(c.*field, fmt_double); }};
  };
  auto add_int_list = [&reg](const std::string& key, std::vector<int> ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
          std::vector<int> out;
          for (const auto& part : split_csv(v)) out.push_back(parse_int(k, part));
          c.*field = std::move(out);
        },
        [field](const ExperimentConfig& c) {
          return fmt_list(c.*field, [](int x) { return std::to_string(x); });
        }};
  };
  auto add_u64_list = [&reg](const std::string& key,
                             std::vector<uint64_t> ExperimentConfig::* field) {
    reg[key] = Entry{
        [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
          std::vector<uint64_t> out;
          for (const auto& part : split_csv(v)) out.push_back(parse_u64(k, part));
          c.*field = std::move(out);
        },
        [field](const ExperimentConfig& c) {
          return fmt_list(c.*field, [](uint64_t x) { return std::to_string(x); });
        }};
  };

  add_u64("data.seed", &ExperimentConfig::data_seed);
  add_int("data.subjects", &ExperimentConfig::data_subjects);
  add_int("data.epochs_per_subject", &ExperimentConfig::data_epochs_per_subject);
  add_int("data.t", &ExperimentConfig::data_t);
  add_double_list("data.priors", &ExperimentConfig::data_priors);
  // bands as lo:hi pairs, e.g. 0.4:0.7,0.9:1.2,...
  reg["data.bands"] = Entry{
      [](ExperimentConfig& c, const std::string& k, const std::string& v) {
        std::vector<double> lo, hi;
        for (const auto& part : split_csv(v)) {
          const auto colon = part.find(':');
          require(colon != std::string::npos, ErrorKind::Config, "key '", k,
                  "': band '", part, "' is not lo:hi");
          lo.push_back(parse_double(k, trim(part.substr(0, colon))));
          hi.push_back(parse_double(k, trim(part.substr(colon + 1))));
        }
        c.data_band_lo = std::move(lo);
        c.data_band_hi = std::move(hi);
      },
      [](const ExperimentConfig& c) {
        std::string out;
        for (size_t i = 0; i < c.data_band_lo.size(); ++i) {
          if (i) out += ",";
          out += fmt_double(c.data_band_lo[i]) + ":" + fmt_double(c.data_band_hi[i]);
        }
        return out;
      }};
  add_double("data.amp_primary", &ExperimentConfig::data_amp_primary);
  add_double("data.amp_secondary", &ExperimentConfig::data_amp_secondary);
  add_double("data.base_noise_sigma", &ExperimentConfig::data_base_noise_sigma);
  add_string("data.source_path", &ExperimentConfig::data_source_path);
  add_string("data.target_path", &ExperimentConfig::data_target_path);

  add_double("shift.amplitude_scale", &ExperimentConfig::shift_amplitude_scale);
  add_double("shift.frequency_offset_hz", &ExperimentConfig::shift_frequency_offset_hz);
  add_double("shift.extra_noise_sigma", &ExperimentConfig::shift_extra_noise_sigma);
  add_double("shift.resample_factor", &ExperimentConfig::shift_resample_factor);

  add_double("split.train_frac", &ExperimentConfig::split_train_frac);
  add_double("split.val_frac", &ExperimentConfig::split_val_frac);
  add_double("split.test_frac", &ExperimentConfig::split_test_frac);
  add_u64("split.seed", &ExperimentConfig::split_seed);

  add_int_list("arch.conv_channels", &ExperimentConfig::arch_conv_channels);
  add_int_list("arch.conv_kernels", &ExperimentConfig::arch_conv_kernels);
  add_int_list("arch.conv_strides", &ExperimentConfig::arch_conv_strides);
  add_int_list("arch.conv_paddings", &ExperimentConfig::arch_conv_paddings);
  add_int("arch.pool_kernel", &ExperimentConfig::arch_pool_kernel);
  add_int("arch.pool_stride", &ExperimentConfig::arch_pool_stride);
  add_int("arch.attention_dim", &ExperimentConfig::arch_attention_dim);
  add_int("arch.classifier_hidden", &ExperimentConfig::arch_classifier_hidden);
  add_int("arch.discriminator_hidden", &ExperimentConfig::arch_discriminator_hidden);

  add_double("loss.lambda1", &ExperimentConfig::loss_lambda1);
  add_double("loss.lambda2", &ExperimentConfig::loss_lambda2);

  add_double("optim.lr", &ExperimentConfig::optim_lr);
  add_double("optim.beta1", &ExperimentConfig::optim_beta1);
  add_double("optim.beta2", &ExperimentConfig::optim_beta2);
  add_double("optim.eps", &ExperimentConfig::optim_eps);
  add_double("optim.weight_decay", &ExperimentConfig::optim_weight_decay);
  add_bool("optim.coupled_decay", &ExperimentConfig::optim_coupled_decay);
  add_double("optim.lr_decay_factor", &ExperimentConfig::optim_lr_decay_factor);
  add_int("optim.lr_decay_epoch", &ExperimentConfig::optim_lr_decay_epoch);

  add_int("train.pretrain_epochs", &ExperimentConfig::train_pretrain_epochs);
  add_int("train.epochs_per_round", &ExperimentConfig::train_epochs_per_round);
  add_int("train.self_train_rounds", &ExperimentConfig::train_self_train_rounds);
  add_int("train.batch_size", &ExperimentConfig::train_batch_size);
  add_u64_list("train.seeds", &ExperimentConfig::train_seeds);
  add_string("train.mode", &ExperimentConfig::train_mode);
  add_int("train.parallel_seeds", &ExperimentConfig::train_parallel_seeds);

  add_bool("ablate.attention", &ExperimentConfig::ablate_attention);
  add_bool("ablate.dual_classifiers", &ExperimentConfig::ablate_dual_classifiers);
  add_bool("ablate.self_training", &ExperimentConfig::ablate_self_training);

  add_double_list("sweep.lambda1_grid", &ExperimentConfig::sweep_lambda1_grid);
  add_double_list("sweep.lambda2_grid", &ExperimentConfig::sweep_lambda2_grid);
  return reg;
}

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> reg = build_registry();
  return reg;
}

}  // namespace

void config_set(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto it = registry().find(key);
  require(it != registry().end(), ErrorKind::Config, "unknown config key '", key, "'");
  it->second.set(cfg, key, value);
}

std::string config_get(const ExperimentConfig& cfg, const std::string& key) {
  auto it = registry().find(key);
  require(it != registry().end(), ErrorKind::Config, "unknown config key '", key, "'");
  return it->second.get(cfg);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, entry] : registry()) {
    (void)entry;
    keys.push_back(k);
  }
  return keys;
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config, origin, ":", line_no,
            ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      config_set(cfg, key, value);
    } catch (const AdastError& e) {
      raise(ErrorKind::Config, origin, ":", line_no, ": ", e.what());
    }
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Config, "cannot open config file ", path);
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg;
  apply_config_text(cfg, buf.str(), path);
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& key : config_keys()) {
    out += key + " = " + config_get(cfg, key) + "\n";
  }
  return out;
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  auto check = [&problems](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  if (cfg.data_source_path.empty() || cfg.data_target_path.empty()) {
    try {
      to_shift_spec(cfg).validate();
    } catch (const AdastError& e) {
      problems.emplace_back(e.what());
    }
  }
  check(std::fabs(cfg.split_train_frac + cfg.split_val_frac + cfg.split_test_frac - 1.0) < 1e-9,
        "split fractions must sum to 1");
  check(cfg.split_train_frac > 0 && cfg.split_val_frac > 0 && cfg.split_test_frac > 0,
        "split fractions must be positive");
  try {
    to_model_config(cfg, cfg.data_t, 5).validate();
  } catch (const AdastError& e) {
    problems.emplace_back(e.what());
  }
  check(cfg.loss_lambda1 >= 0, "loss.lambda1 must be >= 0");
  check(cfg.loss_lambda2 >= 0, "loss.lambda2 must be >= 0");
  check(cfg.optim_lr > 0, "optim.lr must be positive");
  check(cfg.optim_beta1 >= 0 && cfg.optim_beta1 < 1, "optim.beta1 must lie in [0,1)");
  check(cfg.optim_beta2 >= 0 && cfg.optim_beta2 < 1, "optim.beta2 must lie in [0,1)");
  check(cfg.optim_eps > 0, "optim.eps must be positive");
  check(cfg.optim_weight_decay >= 0, "optim.weight_decay must be >= 0");
  check(cfg.optim_lr_decay_factor > 0, "optim.lr_decay_factor must be positive");
  check(cfg.optim_lr_decay_epoch >= 0, "optim.lr_decay_epoch must be >= 0");
  check(cfg.train_pretrain_epochs >= 0, "train.pretrain_epochs must be >= 0");
  check(cfg.train_epochs_per_round >= 0, "train.epochs_per_round must be >= 0");
  check(cfg.train_self_train_rounds >= 0, "train.self_train_rounds must be >= 0");
  check(cfg.train_batch_size >= 1, "train.batch_size must be >= 1");
  check(!cfg.train_seeds.empty(), "train.seeds must not be empty");
  check(cfg.train_mode == "adast" || cfg.train_mode == "source-only",
        "train.mode must be adast or source-only");
  check(cfg.train_parallel_seeds >= 1, "train.parallel_seeds must be >= 1");
  check(!cfg.sweep_lambda1_grid.empty(), "sweep.lambda1_grid must not be empty");
  check(!cfg.sweep_lambda2_grid.empty(), "sweep.lambda2_grid must not be empty");
  for (double v : cfg.sweep_lambda1_grid) check(v >= 0, "sweep.lambda1_grid entries must be >= 0");
  for (double v : cfg.sweep_lambda2_grid) check(v >= 0, "sweep.lambda2_grid entries must be >= 0");
  return problems;
}

void require_valid(const ExperimentConfig& cfg) {
  auto problems = validate_config(cfg);
  if (problems.empty()) return;
  std::string all = "invalid configuration (" + std::to_string(problems.size()) + " problem(s)):";
  for (const auto& p : problems) all += "\n  - " + p;
  raise(ErrorKind::Config, all);
}

SyntheticShiftSpec to_shift_spec(const ExperimentConfig& cfg) {
  SyntheticShiftSpec spec;
  spec.seed = cfg.data_seed;
  spec.n_subjects = cfg.data_subjects;
  spec.epochs_per_subject = cfg.data_epochs_per_subject;
  spec.t = cfg.data_t;
  require(cfg.data_priors.size() == 5, ErrorKind::Config, "data.priors needs 5 entries, got ",
          cfg.data_priors.size());
  require(cfg.data_band_lo.size() == 5 && cfg.data_band_hi.size() == 5, ErrorKind::Config,
          "data.bands needs 5 lo:hi pairs");
  for (size_t i = 0; i < 5; ++i) {
    spec.class_priors[i] = cfg.data_priors[i];
    spec.bands[i] = {cfg.data_band_lo[i], cfg.data_band_hi[i]};
  }
  spec.amp_primary = cfg.data_amp_primary;
  spec.amp_secondary = cfg.data_amp_secondary;
  spec.base_noise_sigma = cfg.data_base_noise_sigma;
  spec.amplitude_scale = cfg.shift_amplitude_scale;
  spec.frequency_offset_hz = cfg.shift_frequency_offset_hz;
  spec.extra_noise_sigma = cfg.shift_extra_noise_sigma;
  spec.resample_factor = cfg.shift_resample_factor;
  return spec;
}

ModelConfig to_model_config(const ExperimentConfig& cfg, int epoch_len, int num_classes) {
  ModelConfig m;
  m.epoch_len = epoch_len;
  m.num_classes = num_classes;
  m.conv_channels = cfg.arch_conv_channels;
  m.conv_kernels = cfg.arch_conv_kernels;
  m.conv_strides = cfg.arch_conv_strides;
  m.conv_paddings = cfg.arch_conv_paddings;
  m.pool_kernel = cfg.arch_pool_kernel;
  m.pool_stride = cfg.arch_pool_stride;
  m.attention_dim = cfg.arch_attention_dim;
  m.classifier_hidden = cfg.arch_classifier_hidden;
  m.discriminator_hidden = cfg.arch_discriminator_hidden;
  m.use_attention = cfg.ablate_attention;
  m.use_dual_classifiers = cfg.ablate_dual_classifiers;
  return m;
}

TrainSchedule to_schedule(const ExperimentConfig& cfg) {
  return TrainSchedule{cfg.train_pretrain_epochs, cfg.train_epochs_per_round,
                       cfg.train_self_train_rounds, cfg.train_batch_size};
}

AblationToggles to_toggles(const ExperimentConfig& cfg) {
  return AblationToggles{cfg.ablate_attention, cfg.ablate_dual_classifiers,
                         cfg.ablate_self_training};
}

LossWeights to_loss_weights(const ExperimentConfig& cfg) {
  return LossWeights{cfg.loss_lambda1, cfg.loss_lambda2};
}

AdamConfig to_adam_config(const ExperimentConfig& cfg) {
  AdamConfig a;
  a.lr = cfg.optim_lr;
  a.beta1 = cfg.optim_beta1;
  a.beta2 = cfg.optim_beta2;
  a.eps = cfg.optim_eps;
  a.weight_decay = cfg.optim_weight_decay;
  a.coupled_decay = cfg.optim_coupled_decay;
  return a;
}

}  // namespace adast
