#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace adast {

// Error taxonomy used across the library. The C API maps these onto
// status codes; the CLI maps statuses onto exit codes.
enum class ErrorKind {
  InvalidArgument,  // bad call-site usage
  Shape,            // tensor dimension mismatch
  Rank,             // wrong tensor rank (e.g. non-scalar loss)
  Numeric,          // NaN/inf or out-of-domain value
  Label,            // class label out of range
  Geometry,         // conv/pool output length < 1
  Statistics,       // batch too small for batch statistics
  Format,           // malformed file
  Split,            // invalid subject split request
  Spec,             // invalid synthetic data spec
  Config,           // configuration error
  Compat,           // checkpoint/dataset/architecture mismatch
  Io,               // filesystem failure
};

const char* error_kind_name(ErrorKind kind);

class AdastError : public std::runtime_error {
 public:
  AdastError(ErrorKind kind, std::string message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Rank: return "rank error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Label: return "label error";
    case ErrorKind::Geometry: return "geometry error";
    case ErrorKind::Statistics: return "statistics error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Split: return "split error";
    case ErrorKind::Spec: return "spec error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Compat: return "compatibility error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

namespace detail {
inline void msg_append(std::ostringstream&) {}
template <typename T, typename... Rest>
void msg_append(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  msg_append(os, rest...);
}
}  // namespace detail

template <typename... Parts>
[[noreturn]] void raise(ErrorKind kind, const Parts&... parts) {
  std::ostringstream os;
  detail::msg_append(os, parts...);
  throw AdastError(kind, os.str());
}

template <typename... Parts>
void require(bool cond, ErrorKind kind, const Parts&... parts) {
  if (!cond) raise(kind, parts...);
}

}  // namespace adast
