#pragma once

#include <stdexcept>
#include <string>

namespace rgbm {

// All failures carry a stable slug so the CLI can emit machine-readable
// error lines and map exit codes without string-matching messages.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* invalid_state = "invalid-state";
inline constexpr const char* numerical_overflow = "numerical-overflow";
inline constexpr const char* degenerate_total = "degenerate-total";
inline constexpr const char* usage = "usage";
inline constexpr const char* data = "data";
inline constexpr const char* insufficient_data = "insufficient-data";
inline constexpr const char* infeasible_target = "infeasible-target";
inline constexpr const char* infeasible_share = "infeasible-share";
inline constexpr const char* no_stationary_distribution = "no-stationary-distribution";
inline constexpr const char* gap = "gap";
inline constexpr const char* duplicate_key = "duplicate-key";
inline constexpr const char* parse = "parse";
inline constexpr const char* validation = "validation";
inline constexpr const char* empty_dataset = "empty-dataset";
inline constexpr const char* numeric = "numeric";
inline constexpr const char* io = "io";
}  // namespace errc

}  // namespace rgbm
