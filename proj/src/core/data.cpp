#include "core/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "core/binio.hpp"

namespace adast {

namespace {
constexpr char kMagic[] = "ADST";
constexpr uint32_t kVersion = 1;
constexpr uint8_t kUnlabeledByte = 255;
}  // namespace

std::vector<uint32_t> DomainDataset::subjects() const {
  std::set<uint32_t> ids;
  for (const auto& r : records) ids.insert(r.subject_id);
  return {ids.begin(), ids.end()};
}

std::vector<size_t> DomainDataset::split_indices(SplitId split) const {
  require(!subject_split.empty(), ErrorKind::InvalidArgument,
          "dataset has no split assignment; call split_subjects first");
  std::vector<size_t> out;
  for (size_t i = 0; i < records.size(); ++i) {
    auto it = subject_split.find(records[i].subject_id);
    require(it != subject_split.end(), ErrorKind::Split, "subject ", records[i].subject_id,
            " has no split assignment");
    if (it->second == split) out.push_back(i);
  }
  return out;
}

std::vector<int64_t> DomainDataset::class_histogram() const {
  std::vector<int64_t> counts(static_cast<size_t>(k), 0);
  for (const auto& r : records) {
    if (r.stage != kUnlabeled) counts[static_cast<size_t>(r.stage)]++;
  }
  return counts;
}

bool DomainDataset::same_payload(const DomainDataset& other) const {
  return t == other.t && k == other.k && records == other.records;
}

void SyntheticShiftSpec::validate() const {
  require(n_subjects >= 1, ErrorKind::Spec, "synthetic: n_subjects must be >= 1");
  require(epochs_per_subject >= 1, ErrorKind::Spec, "synthetic: epochs_per_subject must be >= 1");
  require(t >= 8, ErrorKind::Spec, "synthetic: T must be >= 8");
  require(k == 5, ErrorKind::Spec, "synthetic: generator is defined for K = 5 stages");
  double prior_sum = 0.0;
  for (double p : class_priors) {
    require(p >= 0.0, ErrorKind::Spec, "synthetic: negative class prior");
    prior_sum += p;
  }
  require(std::fabs(prior_sum - 1.0) < 1e-9, ErrorKind::Spec, "synthetic: class priors sum to ",
          prior_sum, ", expected 1");
  for (size_t c = 0; c < bands.size(); ++c) {
    require(bands[c].first > 0.0 && bands[c].second > bands[c].first, ErrorKind::Spec,
            "synthetic: band ", c, " is not a valid (lo, hi) pair");
    for (size_t o = c + 1; o < bands.size(); ++o) {
      const bool disjoint = bands[c].second <= bands[o].first || bands[o].second <= bands[c].first;
      require(disjoint, ErrorKind::Spec, "synthetic: bands ", c, " and ", o, " overlap");
    }
  }
  const double nyquist = static_cast<double>(t) / 30.0 / 2.0;
  for (const auto& band : bands) {
    require(band.second + std::fabs(frequency_offset_hz) < nyquist, ErrorKind::Spec,
            "synthetic: band edge ", band.second, " + offset exceeds Nyquist ", nyquist);
  }
  require(amplitude_scale > 0.0, ErrorKind::Spec, "synthetic: amplitude_scale must be positive");
  require(resample_factor > 0.0, ErrorKind::Spec, "synthetic: resample_factor must be positive");
  require(base_noise_sigma >= 0.0 && extra_noise_sigma >= 0.0, ErrorKind::Spec,
          "synthetic: noise sigmas must be >= 0");
}

namespace {

int sample_stage(const std::array<double, 5>& priors, double u) {
  double acc = 0.0;
  for (int c = 0; c < 5; ++c) {
    acc += priors[static_cast<size_t>(c)];
    if (u < acc) return c;
  }
  return 4;
}

}  // namespace

DomainDataset generate_synthetic(const SyntheticShiftSpec& spec, DomainRole role) {
  spec.validate();
  const bool shifted = role == DomainRole::Target;
  const uint64_t role_tag = shifted ? 1 : 0;
  const double rate = static_cast<double>(spec.t) / 30.0;

  const double amp_scale = shifted ? spec.amplitude_scale : 1.0;
  const double freq_offset = shifted ? spec.frequency_offset_hz : 0.0;
  const double noise_sigma = spec.base_noise_sigma + (shifted ? spec.extra_noise_sigma : 0.0);
  const double resample = shifted ? spec.resample_factor : 1.0;
  const int t_sim = resample == 1.0
                        ? spec.t
                        : std::max<int>(4, static_cast<int>(std::llround(spec.t * resample)));
  const double rate_sim = static_cast<double>(t_sim) / 30.0;

  DomainDataset ds;
  ds.domain_name = domain_role_name(role);
  ds.sampling_rate_hz = rate;
  ds.t = spec.t;
  ds.k = spec.k;
  ds.records.reserve(static_cast<size_t>(spec.n_subjects) * spec.epochs_per_subject);

  std::vector<double> sim(static_cast<size_t>(t_sim));
  for (int s = 0; s < spec.n_subjects; ++s) {
    Rng subject_rng(mix_seed(spec.seed, role_tag, static_cast<uint64_t>(s), 0xFFFFFFFFULL));
    const double phase1 = subject_rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double phase2 = subject_rng.uniform(0.0, 2.0 * std::numbers::pi);

    for (int e = 0; e < spec.epochs_per_subject; ++e) {
      Rng rng(mix_seed(spec.seed, role_tag, static_cast<uint64_t>(s), static_cast<uint64_t>(e)));
      const int stage = sample_stage(spec.class_priors, rng.uniform());
      const auto& band = spec.bands[static_cast<size_t>(stage)];
      // class-graded offset: higher stages drift further, so no single global
      // correction aligns every class at once
      const double offset = freq_offset * (static_cast<double>(stage + 1) / spec.k);
      const double f1 = rng.uniform(band.first, band.second) + offset;
      const double f2 = rng.uniform(band.first, band.second) + offset;

      for (int j = 0; j < t_sim; ++j) {
        const double time = static_cast<double>(j) / rate_sim;
        sim[static_cast<size_t>(j)] =
            spec.amp_primary * std::sin(2.0 * std::numbers::pi * f1 * time + phase1) +
            spec.amp_secondary * std::sin(2.0 * std::numbers::pi * f2 * time + phase2);
      }

      EpochRecord rec;
      rec.subject_id = static_cast<uint32_t>(s);
      rec.stage = stage;
      rec.signal.resize(static_cast<size_t>(spec.t));
      for (int i = 0; i < spec.t; ++i) {
        double v;
        if (t_sim == spec.t) {
          v = sim[static_cast<size_t>(i)];
        } else {
          const double pos = static_cast<double>(i) * t_sim / spec.t;
          const int j0 = static_cast<int>(pos);
          const int j1 = std::min(j0 + 1, t_sim - 1);
          const double frac = pos - j0;
          v = (1.0 - frac) * sim[static_cast<size_t>(j0)] + frac * sim[static_cast<size_t>(j1)];
        }
        rec.signal[static_cast<size_t>(i)] = amp_scale * v + noise_sigma * rng.normal();
      }

      // per-epoch z-score, then f32 quantization so files round-trip exactly
      double mean = 0.0;
      for (double v : rec.signal) mean += v;
      mean /= static_cast<double>(spec.t);
      double var = 0.0;
      for (double v : rec.signal) var += (v - mean) * (v - mean);
      var /= static_cast<double>(spec.t);
      const double sd = std::sqrt(var);
      for (double& v : rec.signal) {
        v = sd > 1e-9 ? (v - mean) / sd : 0.0;
        v = static_cast<double>(static_cast<float>(v));
      }
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

void save_dataset(const DomainDataset& ds, const std::string& path) {
  BinWriter w(path);
  w.str(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<uint32_t>(ds.records.size()));
  w.u32(static_cast<uint32_t>(ds.t));
  w.u32(static_cast<uint32_t>(ds.k));
  for (const auto& rec : ds.records) {
    require(static_cast<int>(rec.signal.size()) == ds.t, ErrorKind::InvalidArgument,
            "record signal length ", rec.signal.size(), " differs from dataset T ", ds.t);
    require(rec.stage == kUnlabeled || (rec.stage >= 0 && rec.stage < ds.k),
            ErrorKind::InvalidArgument, "record stage ", rec.stage, " out of range");
    w.u32(rec.subject_id);
    w.u8(rec.stage == kUnlabeled ? kUnlabeledByte : static_cast<uint8_t>(rec.stage));
    for (double v : rec.signal) w.f32(static_cast<float>(v));
  }
  w.close();
}

DomainDataset load_dataset(const std::string& path) {
  BinReader r(path);
  const std::string magic = r.str(4);
  if (magic != kMagic) {
    raise(ErrorKind::Format, path, ": bad magic at byte offset 0");
  }
  const uint32_t version = r.u32();
  if (version != kVersion) {
    raise(ErrorKind::Format, path, ": unsupported version ", version, " at byte offset 4");
  }
  const uint32_t n = r.u32();
  const uint32_t t = r.u32();
  const uint32_t k = r.u32();
  if (k < 2 || k > 254) {
    raise(ErrorKind::Format, path, ": implausible class count ", k, " at byte offset 12");
  }

  DomainDataset ds;
  ds.domain_name = std::filesystem::path(path).stem().string();
  ds.t = static_cast<int>(t);
  ds.k = static_cast<int>(k);
  ds.sampling_rate_hz = static_cast<double>(t) / 30.0;
  ds.records.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    EpochRecord rec;
    rec.subject_id = r.u32();
    const size_t stage_offset = r.offset();
    const uint8_t stage = r.u8();
    if (stage == kUnlabeledByte) {
      rec.stage = kUnlabeled;
    } else if (stage >= k) {
      raise(ErrorKind::Format, path, ": record ", i, " has label ", static_cast<int>(stage),
            " > K-1 = ", k - 1, " at byte offset ", stage_offset);
    } else {
      rec.stage = static_cast<int>(stage);
    }
    rec.signal.resize(t);
    for (uint32_t j = 0; j < t; ++j) {
      rec.signal[j] = static_cast<double>(r.f32());
    }
    ds.records.push_back(std::move(rec));
  }
  if (!r.at_eof()) {
    raise(ErrorKind::Format, path, ": trailing bytes at offset ", r.offset());
  }
  return ds;
}

void split_subjects(DomainDataset& ds, double train_frac, double val_frac, double test_frac,
                    uint64_t seed) {
  require(train_frac >= 0 && val_frac >= 0 && test_frac >= 0 &&
              std::fabs(train_frac + val_frac + test_frac - 1.0) < 1e-9,
          ErrorKind::Split, "split fractions must be non-negative and sum to 1");
  auto ids = ds.subjects();
  require(ids.size() >= 5, ErrorKind::Split, "subject-wise split needs >= 5 subjects, got ",
          ids.size());
  Rng rng(seed);
  rng.shuffle(ids);
  const size_t n = ids.size();
  const size_t n_train = static_cast<size_t>(train_frac * static_cast<double>(n));
  const size_t n_val = static_cast<size_t>(val_frac * static_cast<double>(n));
  ds.subject_split.clear();
  for (size_t i = 0; i < n; ++i) {
    SplitId split = SplitId::Test;
    if (i < n_train) {
      split = SplitId::Train;
    } else if (i < n_train + n_val) {
      split = SplitId::Val;
    }
    ds.subject_split[ids[i]] = split;
  }
}

std::vector<std::vector<size_t>> batch_plan(const DomainDataset& ds, SplitId split, int batch_size,
                                            uint64_t seed, int epoch_index) {
  require(batch_size >= 1, ErrorKind::InvalidArgument, "batch_size must be >= 1");
  auto indices = ds.split_indices(split);
  require(!indices.empty(), ErrorKind::InvalidArgument, "batch_plan over empty ", split_name(split),
          " split");
  Rng rng(mix_seed(seed, static_cast<uint64_t>(epoch_index)));
  rng.shuffle(indices);
  std::vector<std::vector<size_t>> plan;
  for (size_t start = 0; start < indices.size(); start += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(indices.size(), start + static_cast<size_t>(batch_size));
    plan.emplace_back(indices.begin() + static_cast<ptrdiff_t>(start),
                      indices.begin() + static_cast<ptrdiff_t>(end));
  }
  return plan;
}

Batch assemble_batch(const DomainDataset& ds, const std::vector<size_t>& indices) {
  require(!indices.empty(), ErrorKind::InvalidArgument, "empty batch");
  const int64_t b = static_cast<int64_t>(indices.size());
  std::vector<double> signals(static_cast<size_t>(b * ds.t));
  Batch batch;
  batch.labels.reserve(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    const auto& rec = ds.records[indices[i]];
    std::copy(rec.signal.begin(), rec.signal.end(), signals.begin() + static_cast<ptrdiff_t>(i * rec.signal.size()));
    batch.labels.push_back(rec.stage);
  }
  batch.signals = Tensor::from_data({b, 1, ds.t}, std::move(signals));
  batch.indices = indices;
  return batch;
}

DomainDataset adaptation_view(const DomainDataset& ds) {
  require(!ds.subject_split.empty(), ErrorKind::InvalidArgument,
          "adaptation_view requires split assignment");
  DomainDataset view = ds;
  for (auto& rec : view.records) {
    if (view.subject_split.at(rec.subject_id) == SplitId::Train) rec.stage = kUnlabeled;
  }
  return view;
}

}  // namespace adast
