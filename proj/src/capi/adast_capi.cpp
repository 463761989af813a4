#include "adast/adast.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "core/harness.hpp"

struct adast_config {
  adast::ExperimentConfig cfg;
};

struct adast_dataset {
  adast::DomainDataset ds;
};

namespace {

thread_local std::string t_last_error;

adast_status map_kind(adast::ErrorKind kind) {
  using adast::ErrorKind;
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Spec:
      return ADAST_ERROR_CONFIG;
    case ErrorKind::Format:
    case ErrorKind::Split:
    case ErrorKind::Compat:
    case ErrorKind::Label:
      return ADAST_ERROR_DATA;
    case ErrorKind::Io:
      return ADAST_ERROR_IO;
    case ErrorKind::Shape:
    case ErrorKind::Rank:
    case ErrorKind::Numeric:
    case ErrorKind::Geometry:
    case ErrorKind::Statistics:
      return ADAST_ERROR_NUMERIC;
    case ErrorKind::InvalidArgument:
      return ADAST_ERROR_INVALID_ARGUMENT;
  }
  return ADAST_ERROR_INVALID_ARGUMENT;
}

template <typename Fn>
adast_status wrap(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return ADAST_OK;
  } catch (const adast::AdastError& e) {
    t_last_error = e.what();
    return map_kind(e.kind());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return ADAST_ERROR_INVALID_ARGUMENT;
  }
}

adast_status fail_invalid(const char* message) {
  t_last_error = message;
  return ADAST_ERROR_INVALID_ARGUMENT;
}

adast::DomainRole to_role(adast_domain_role role) {
  return role == ADAST_DOMAIN_SOURCE ? adast::DomainRole::Source : adast::DomainRole::Target;
}

adast::SplitId to_split(adast_split split) {
  switch (split) {
    case ADAST_SPLIT_TRAIN: return adast::SplitId::Train;
    case ADAST_SPLIT_VAL: return adast::SplitId::Val;
    case ADAST_SPLIT_TEST: return adast::SplitId::Test;
  }
  return adast::SplitId::Test;
}

}  // namespace

extern "C" {

const char* adast_version(void) { return "1.0.0"; }

const char* adast_status_name(adast_status status) {
  switch (status) {
    case ADAST_OK: return "ok";
    case ADAST_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case ADAST_ERROR_CONFIG: return "config error";
    case ADAST_ERROR_DATA: return "data error";
    case ADAST_ERROR_NUMERIC: return "numeric error";
    case ADAST_ERROR_IO: return "io error";
  }
  return "unknown";
}

const char* adast_last_error(void) { return t_last_error.c_str(); }

adast_status adast_config_create(adast_config** out_config) {
  if (out_config == nullptr) return fail_invalid("out_config is NULL");
  return wrap([&] { *out_config = new adast_config(); });
}

void adast_config_destroy(adast_config* config) { delete config; }

adast_status adast_config_load_file(adast_config* config, const char* path) {
  if (config == nullptr || path == nullptr) return fail_invalid("NULL config or path");
  return wrap([&] {
    std::ifstream probe(path);
    adast::require(probe.good(), adast::ErrorKind::Config, "cannot open config file ", path);
    probe.close();
    auto merged = config->cfg;
    // merge semantics: file assignments override the current values
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    adast::apply_config_text(merged, buf.str(), path);
    config->cfg = merged;
  });
}

adast_status adast_config_set(adast_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) {
    return fail_invalid("NULL config, key or value");
  }
  return wrap([&] { adast::config_set(config->cfg, key, value); });
}

adast_status adast_config_get(const adast_config* config, const char* key, char* buffer,
                              size_t buffer_len) {
  if (config == nullptr || key == nullptr || buffer == nullptr) {
    return fail_invalid("NULL config, key or buffer");
  }
  return wrap([&] {
    const std::string value = adast::config_get(config->cfg, key);
    adast::require(value.size() + 1 <= buffer_len, adast::ErrorKind::InvalidArgument,
                   "buffer of ", buffer_len, " bytes too small for value of ", value.size() + 1);
    std::memcpy(buffer, value.c_str(), value.size() + 1);
  });
}

adast_status adast_config_validate(const adast_config* config) {
  if (config == nullptr) return fail_invalid("NULL config");
  return wrap([&] { adast::require_valid(config->cfg); });
}

adast_status adast_config_write_file(const adast_config* config, const char* path) {
  if (config == nullptr || path == nullptr) return fail_invalid("NULL config or path");
  return wrap([&] { adast::write_text_file(path, adast::serialize_config(config->cfg)); });
}

adast_status adast_dataset_generate(const adast_config* config, adast_domain_role role,
                                    adast_dataset** out_dataset) {
  if (config == nullptr || out_dataset == nullptr) return fail_invalid("NULL config or output");
  return wrap([&] {
    auto ds = adast::generate_synthetic(adast::to_shift_spec(config->cfg), to_role(role));
    *out_dataset = new adast_dataset{std::move(ds)};
  });
}

adast_status adast_dataset_load(const char* path, adast_dataset** out_dataset) {
  if (path == nullptr || out_dataset == nullptr) return fail_invalid("NULL path or output");
  return wrap([&] { *out_dataset = new adast_dataset{adast::load_dataset(path)}; });
}

adast_status adast_dataset_save(const adast_dataset* dataset, const char* path) {
  if (dataset == nullptr || path == nullptr) return fail_invalid("NULL dataset or path");
  return wrap([&] { adast::save_dataset(dataset->ds, path); });
}

adast_status adast_dataset_get_info(const adast_dataset* dataset, adast_dataset_info* out_info) {
  if (dataset == nullptr || out_info == nullptr) return fail_invalid("NULL dataset or output");
  out_info->n_records = dataset->ds.records.size();
  out_info->n_subjects = static_cast<uint32_t>(dataset->ds.subjects().size());
  out_info->t = static_cast<uint32_t>(dataset->ds.t);
  out_info->k = static_cast<uint32_t>(dataset->ds.k);
  t_last_error.clear();
  return ADAST_OK;
}

adast_status adast_dataset_class_histogram(const adast_dataset* dataset, uint64_t* counts,
                                           size_t counts_len) {
  if (dataset == nullptr || counts == nullptr) return fail_invalid("NULL dataset or counts");
  return wrap([&] {
    auto hist = dataset->ds.class_histogram();
    adast::require(counts_len >= hist.size(), adast::ErrorKind::InvalidArgument,
                   "counts array of ", counts_len, " entries too small for k=", hist.size());
    for (size_t i = 0; i < hist.size(); ++i) counts[i] = static_cast<uint64_t>(hist[i]);
  });
}

void adast_dataset_destroy(adast_dataset* dataset) { delete dataset; }

adast_status adast_generate_data_files(const adast_config* config, const char* out_dir) {
  if (config == nullptr || out_dir == nullptr) return fail_invalid("NULL config or out_dir");
  return wrap([&] { adast::generate_data_files(config->cfg, out_dir); });
}

adast_status adast_run_training(const adast_config* config, const char* out_dir,
                                adast_run_summary* out_summary) {
  if (config == nullptr || out_dir == nullptr) return fail_invalid("NULL config or out_dir");
  return wrap([&] {
    auto summary = adast::run_training(config->cfg, out_dir);
    if (out_summary != nullptr) {
      out_summary->acc_mean = summary.acc_mean;
      out_summary->acc_std = summary.acc_std;
      out_summary->mf1_mean = summary.mf1_mean;
      out_summary->mf1_std = summary.mf1_std;
      out_summary->n_seeds = static_cast<uint32_t>(summary.seeds.size());
    }
  });
}

adast_status adast_run_ablation(const adast_config* config, const char* out_dir) {
  if (config == nullptr || out_dir == nullptr) return fail_invalid("NULL config or out_dir");
  return wrap([&] { adast::run_ablation(config->cfg, out_dir); });
}

adast_status adast_run_sweep(const adast_config* config, int which_lambda, const char* out_dir) {
  if (config == nullptr || out_dir == nullptr) return fail_invalid("NULL config or out_dir");
  return wrap([&] { adast::run_sweep(config->cfg, which_lambda, out_dir); });
}

adast_status adast_evaluate_checkpoint(const adast_config* config, const char* checkpoint_path,
                                       const char* data_path, adast_domain_role route,
                                       adast_split split, const char* report_path,
                                       double* out_acc, double* out_mf1) {
  if (config == nullptr || checkpoint_path == nullptr || data_path == nullptr) {
    return fail_invalid("NULL config, checkpoint or data path");
  }
  return wrap([&] {
    auto result = adast::evaluate_checkpoint_file(config->cfg, checkpoint_path, data_path,
                                                  to_role(route), to_split(split));
    if (report_path != nullptr) {
      adast::write_text_file(report_path, adast::format_report(result));
      adast::write_text_file(std::string(report_path) + ".csv", adast::report_csv(result));
    }
    if (out_acc != nullptr) *out_acc = result.acc;
    if (out_mf1 != nullptr) *out_mf1 = result.mf1;
  });
}

adast_status adast_dump_embeddings(const adast_config* config, const char* checkpoint_path,
                                   const char* data_path, adast_domain_role route,
                                   const char* out_csv) {
  if (config == nullptr || checkpoint_path == nullptr || data_path == nullptr ||
      out_csv == nullptr) {
    return fail_invalid("NULL argument");
  }
  return wrap([&] {
    adast::dump_embeddings_file(config->cfg, checkpoint_path, data_path, to_role(route), out_csv);
  });
}

}  // extern "C"
