#pragma once

namespace adast {

enum class DomainRole { Source, Target };

enum class SplitId { Train, Val, Test };

inline const char* domain_role_name(DomainRole r) {
  return r == DomainRole::Source ? "source" : "target";
}

inline const char* split_name(SplitId s) {
  switch (s) {
    case SplitId::Train: return "train";
    case SplitId::Val: return "val";
    case SplitId::Test: return "test";
  }
  return "?";
}

// In-memory stage sentinel for unlabeled records (255 on disk).
constexpr int kUnlabeled = -1;

}  // namespace adast
