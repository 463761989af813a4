#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "core/types.hpp"

namespace adast {

struct EpochRecord {
  uint32_t subject_id = 0;
  std::vector<double> signal;  // z-scored amplitude, values exactly f32-representable
  int stage = kUnlabeled;      // 0..K-1 or kUnlabeled

  bool operator==(const EpochRecord&) const = default;
};

struct DomainDataset {
  std::string domain_name;
  double sampling_rate_hz = 0.0;
  int t = 0;
  int k = 5;
  std::vector<EpochRecord> records;
  // Assigned by subject_split(); every record of a subject shares one split.
  std::map<uint32_t, SplitId> subject_split;

  std::vector<uint32_t> subjects() const;
  std::vector<size_t> split_indices(SplitId split) const;
  std::vector<int64_t> class_histogram() const;
  bool same_payload(const DomainDataset& other) const;  // file-format fields only
};

// Deterministic stand-in for cross-dataset recordings: class-banded sinusoid
// pairs with per-subject phase and additive noise; the target role distorts
// amplitude, frequency, noise level and effective sampling rate.
struct SyntheticShiftSpec {
  uint64_t seed = 1;
  int n_subjects = 20;
  int epochs_per_subject = 200;
  int t = 300;
  int k = 5;
  std::array<double, 5> class_priors{0.12, 0.10, 0.42, 0.20, 0.16};
  // disjoint per-class frequency bands (Hz)
  std::array<std::pair<double, double>, 5> bands{
      std::pair{0.4, 0.7}, std::pair{0.9, 1.2}, std::pair{1.4, 1.7},
      std::pair{1.9, 2.2}, std::pair{2.4, 2.7}};
  double amp_primary = 1.0;
  double amp_secondary = 0.5;
  double base_noise_sigma = 0.25;

  // target-domain shift knobs (neutral: 1, 0, 0, 1). The frequency offset is
  // the peak value: class c drifts by offset*(c+1)/K, so the distortion is
  // class-conditional rather than a single global translation.
  double amplitude_scale = 1.5;
  double frequency_offset_hz = 0.2;
  double extra_noise_sigma = 0.45;
  double resample_factor = 0.75;

  void validate() const;
};

DomainDataset generate_synthetic(const SyntheticShiftSpec& spec, DomainRole role);

// Epoch file: magic "ADST", u32 version=1, u32 n_records, u32 T, u32 K, then
// per record u32 subject_id, u8 stage (255 = unlabeled), T × f32 signal.
// Little-endian throughout.
DomainDataset load_dataset(const std::string& path);
void save_dataset(const DomainDataset& ds, const std::string& path);

// Shuffles subjects by seed, then assigns floor(train*n) / floor(val*n) /
// remainder. Requires at least 5 subjects.
void split_subjects(DomainDataset& ds, double train_frac, double val_frac, double test_frac,
                    uint64_t seed);

struct Batch {
  Tensor signals;                // [B × 1 × T]
  std::vector<int> labels;       // kUnlabeled entries for unlabeled records
  std::vector<size_t> indices;   // positions in ds.records
};

// Record-index order for one pass: reshuffled per (seed, epoch_index), last
// partial batch kept.
std::vector<std::vector<size_t>> batch_plan(const DomainDataset& ds, SplitId split,
                                            int batch_size, uint64_t seed, int epoch_index);

Batch assemble_batch(const DomainDataset& ds, const std::vector<size_t>& indices);

// Copy whose train-split records carry the unlabeled sentinel; hands the
// adaptation loop a target domain whose train labels cannot be read.
DomainDataset adaptation_view(const DomainDataset& ds);

}  // namespace adast
