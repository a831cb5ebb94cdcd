#ifndef RAMANMAG_ERRORS_HPP
#define RAMANMAG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ramanmag {

// Stable error codes, mirrored one-to-one by the C API status enum.
enum class ErrorCode {
    ok = 0,
    invalid_argument = 1,
    singular_system = 2,
    no_convergence = 3,
    degenerate_curve = 4,
    parse = 5,
    validation = 6,
    baseline_missing = 7,
    task_failed = 8,
    io = 9,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

// Constrained steady-state system is rank-deficient (e.g. no pump and no drive).
struct SingularSystem : Error {
    explicit SingularSystem(const std::string& what) : Error(ErrorCode::singular_system, what) {}
};

struct NoConvergence : Error {
    explicit NoConvergence(const std::string& what) : Error(ErrorCode::no_convergence, what) {}
};

// Response curve has no usable slope anywhere (flat output, e.g. MW off).
struct DegenerateCurve : Error {
    explicit DegenerateCurve(const std::string& what) : Error(ErrorCode::degenerate_curve, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorCode::parse, what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorCode::validation, what) {}
};

struct BaselineMissing : Error {
    explicit BaselineMissing(const std::string& what) : Error(ErrorCode::baseline_missing, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace ramanmag

#endif
