#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace invitesim {

enum class Scheme { A, B };

/// Fluid-scale rates; the r-th system sees customer arrivals at rate lambda * scale_r.
struct ModelParams {
    double lambda = 1.0;
    double scale_r = 1000.0;
    double beta = 1.0;
    double beta_tilde = 0.0;
    double gamma = 2.0;
    double epsilon = 0.2;
    /// Scheme B only: allow non-integer gamma via randomized rounding of the jump sizes.
    bool randomized_rounding = false;

    /// Arrival rate of the unscaled system, lambda * r.
    [[nodiscard]] double big_lambda() const noexcept { return lambda * scale_r; }
    /// Centering point of X, lambda * r / beta.
    [[nodiscard]] double x_center() const noexcept { return lambda * scale_r / beta; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Checks positivity and 0 < epsilon < gamma^2 beta / 4. Returns the params unchanged.
/// Scheme B additionally needs integer gamma unless randomized rounding is on.
const ModelParams& validate_params(const ModelParams& params, Scheme scheme = Scheme::B);

[[nodiscard]] bool is_integer_gamma(double gamma) noexcept;

/// Arrival-rate function lambda(t) >= 0 in fluid units.
class ArrivalRate {
public:
    enum class Kind { Constant, Sinusoid, PiecewiseConstant };

    static ArrivalRate constant(double rate);
    /// base + amplitude * sin(2 pi t / period)
    static ArrivalRate sinusoid(double base, double amplitude, double period);
    /// values[0] on [0, breakpoints[0]), values[i] on [breakpoints[i-1], breakpoints[i]), ...
    /// values.size() == breakpoints.size() + 1
    static ArrivalRate piecewise(std::vector<double> breakpoints, std::vector<double> values);

    [[nodiscard]] double operator()(double t) const noexcept;
    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_constant() const noexcept { return kind_ == Kind::Constant; }
    /// Upper bound of lambda(t) over [0, horizon].
    [[nodiscard]] double upper_bound(double horizon) const noexcept;
    /// Jump times of lambda inside the open interval (0, horizon).
    [[nodiscard]] std::vector<double> jumps_before(double horizon) const;

    [[nodiscard]] double base() const noexcept { return base_; }
    [[nodiscard]] double amplitude() const noexcept { return amplitude_; }
    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const ArrivalRate&, const ArrivalRate&) = default;

private:
    ArrivalRate() = default;

    Kind kind_ = Kind::Constant;
    double base_ = 0.0;
    double amplitude_ = 0.0;
    double period_ = 1.0;
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

/// Parameters plus the arrival-rate shape, as read from a JSON document.
struct ParamsDocument {
    ModelParams params;
    ArrivalRate arrival = ArrivalRate::constant(1.0);
};

/// Keys: lambda, r, beta, beta_tilde, gamma, epsilon, randomized_rounding,
/// arrival {kind, base, amplitude, period, breakpoints, values}.
/// A missing arrival block means a constant rate equal to lambda.
ParamsDocument params_from_json(const nlohmann::json& doc);
nlohmann::json params_to_json(const ModelParams& params, const ArrivalRate& arrival);

}  // namespace invitesim
