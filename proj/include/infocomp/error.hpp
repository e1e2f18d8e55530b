#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infocomp {

enum class Errc {
  input,             // malformed argument or violated type invariant
  alignment,         // sample identifiers of two objects disagree
  resource,          // requested computation exceeds a configured cap
  numeric_domain,    // e.g. negative radicand
  config,            // inconsistent parameters
  divergence,        // optimizer produced non-finite parameters
  io,                // filesystem failure
  version_mismatch,
  size_mismatch,
  non_finite,
  nonpositive_stddev,
  asymmetric,
  diagonal,
  duplicate_id,
  missing_id,
  malformed,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::input: return "input";
    case Errc::alignment: return "alignment";
    case Errc::resource: return "resource";
    case Errc::numeric_domain: return "numeric_domain";
    case Errc::config: return "config";
    case Errc::divergence: return "divergence";
    case Errc::io: return "io";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::size_mismatch: return "size_mismatch";
    case Errc::non_finite: return "non_finite";
    case Errc::nonpositive_stddev: return "nonpositive_stddev";
    case Errc::asymmetric: return "asymmetric";
    case Errc::diagonal: return "diagonal";
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::missing_id: return "missing_id";
    case Errc::malformed: return "malformed";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace infocomp
