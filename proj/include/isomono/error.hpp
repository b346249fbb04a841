#ifndef ISOMONO_ERROR_HPP
#define ISOMONO_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace isomono
{

enum class ErrorCode
{
  singular_approach,
  evaluation_failure,
  accuracy_check_failed,
  degenerate_input,
  stencil_collision,
  pole_evaluation,
  degenerate_spectrum,
  critical_locus,
  lambda_degenerate,
  cubic_degenerates,
  indeterminate_p,
  polar_locus,
  special_subset,
  not_in_sigma,
  pole_of_formula,
  left_parameter_space,
  path_planning_failure,
  odd_word,
  central_representation,
  branch_approach,
  reducible_determinant,
  root_at_infinity,
  exceptional_decomposition,
  invariant_horizontal,
  degree_collapse,
  invalid_argument,
  io_failure,
};

constexpr std::string_view to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::singular_approach: return "singular approach";
  case ErrorCode::evaluation_failure: return "evaluation failure";
  case ErrorCode::accuracy_check_failed: return "accuracy check failed";
  case ErrorCode::degenerate_input: return "degenerate input";
  case ErrorCode::stencil_collision: return "stencil collision";
  case ErrorCode::pole_evaluation: return "pole evaluation";
  case ErrorCode::degenerate_spectrum: return "degenerate spectrum";
  case ErrorCode::critical_locus: return "critical locus";
  case ErrorCode::lambda_degenerate: return "Lambda degenerate";
  case ErrorCode::cubic_degenerates: return "cubic degenerates";
  case ErrorCode::indeterminate_p: return "indeterminate p";
  case ErrorCode::polar_locus: return "polar locus";
  case ErrorCode::special_subset: return "special subset {Q0 Q1 Qinf = 0}";
  case ErrorCode::not_in_sigma: return "not in Sigma";
  case ErrorCode::pole_of_formula: return "pole of formula";
  case ErrorCode::left_parameter_space: return "left parameter space";
  case ErrorCode::path_planning_failure: return "path planning failure";
  case ErrorCode::odd_word: return "odd word";
  case ErrorCode::central_representation: return "central representation";
  case ErrorCode::branch_approach: return "branch approach";
  case ErrorCode::reducible_determinant: return "reducible determinant";
  case ErrorCode::root_at_infinity: return "root at infinity unsupported";
  case ErrorCode::exceptional_decomposition: return "exceptional decomposition";
  case ErrorCode::invariant_horizontal: return "invariant horizontal";
  case ErrorCode::degree_collapse: return "degree collapse";
  case ErrorCode::invalid_argument: return "invalid argument";
  case ErrorCode::io_failure: return "I/O failure";
  }
  return "unknown error";
}

/// Every failure raised by the library carries one of the codes above; the
/// message starts with the code's canonical text so callers can report it.
class Error : public std::runtime_error
{
public:
  explicit Error(ErrorCode code, const std::string& detail = {})
    : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                        : std::string(to_string(code)) + ": " + detail),
      code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}
#endif
