#include "core/checkpoint.hpp"

#include <map>

#include "core/binio.hpp"

namespace adast {

namespace {
constexpr char kMagic[] = "ADSTCKPT";
constexpr uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(AdastModel& model, const std::string& path) {
  BinWriter w(path);
  w.str(kMagic);
  w.u32(kVersion);
  for (const auto& p : model.named_parameters()) {
    w.u32(static_cast<uint32_t>(p.name.size()));
    w.str(p.name);
    const auto& shape = p.tensor.shape();
    w.u32(static_cast<uint32_t>(shape.size()));
    for (int64_t d : shape) w.u32(static_cast<uint32_t>(d));
    for (double v : p.tensor.data()) w.f64(v);
  }
  w.close();
}

void load_checkpoint(AdastModel& model, const std::string& path) {
  BinReader r(path);
  const std::string magic = r.str(8);
  if (magic != kMagic) {
    raise(ErrorKind::Format, path, ": bad magic at byte offset 0");
  }
  const uint32_t version = r.u32();
  if (version != kVersion) {
    raise(ErrorKind::Format, path, ": unsupported checkpoint version ", version);
  }

  std::map<std::string, std::pair<Shape, std::vector<double>>> records;
  while (!r.at_eof()) {
    const uint32_t name_len = r.u32();
    if (name_len == 0 || name_len > 4096) {
      raise(ErrorKind::Format, path, ": implausible name length ", name_len,
            " at byte offset ", r.offset() - 4);
    }
    std::string name = r.str(name_len);
    const uint32_t rank = r.u32();
    if (rank > 8) {
      raise(ErrorKind::Format, path, ": implausible rank ", rank, " at byte offset ",
            r.offset() - 4);
    }
    Shape shape;
    int64_t numel = 1;
    for (uint32_t i = 0; i < rank; ++i) {
      shape.push_back(static_cast<int64_t>(r.u32()));
      numel *= shape.back();
    }
    std::vector<double> data(static_cast<size_t>(numel));
    for (auto& v : data) v = r.f64();
    if (!records.emplace(std::move(name), std::make_pair(std::move(shape), std::move(data))).second) {
      raise(ErrorKind::Format, path, ": duplicate parameter record");
    }
  }

  auto params = model.named_parameters();
  for (auto& p : params) {
    auto it = records.find(p.name);
    if (it == records.end()) {
      raise(ErrorKind::Compat, path, ": checkpoint lacks parameter '", p.name, "'");
    }
    if (it->second.first != p.tensor.shape()) {
      raise(ErrorKind::Compat, path, ": parameter '", p.name, "' has shape ",
            shape_str(it->second.first), ", model expects ", shape_str(p.tensor.shape()));
    }
    p.tensor.mutable_data() = it->second.second;
    records.erase(it);
  }
  if (!records.empty()) {
    raise(ErrorKind::Compat, path, ": checkpoint has ", records.size(),
          " parameter(s) unknown to the model, first: '", records.begin()->first, "'");
  }
}

}  // namespace adast
