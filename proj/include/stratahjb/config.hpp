#ifndef STRATAHJB_CONFIG_HPP_
#define STRATAHJB_CONFIG_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "stratahjb/control_problem.hpp"

namespace stratahjb {

// Builtin problems: exampleA, exampleB, exampleE, exampleF, ball-eikonal.
std::shared_ptr<ControlProblem> builtin_problem(const std::string& name,
                                                int control_count = 0);
bool is_builtin_problem(const std::string& name);

// Flat key=value sections: [problem], [controls], [terminal], repeated
// [hyperplane] and [stratum]. A builtin `name` in [problem] provides the base
// definition; any sections present override it piecewise.
std::shared_ptr<ControlProblem> load_problem_config(const std::string& path,
                                                    int control_count = 0);
std::shared_ptr<ControlProblem> parse_problem_config(const std::string& text,
                                                     int control_count = 0);

// Exact solutions registered for the builtin problems, with the distance to
// their kink/discontinuity sets for error-band exclusion.
struct ClosedForm {
  std::function<double(double t, const Vec& x)> value;
  std::function<double(double t, const Vec& x)> kink_distance;
};
std::optional<ClosedForm> closed_form_for(const std::string& problem_name,
                                          double horizon);

}  // namespace stratahjb

#endif  // STRATAHJB_CONFIG_HPP_
