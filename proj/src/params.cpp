#include "invitesim/params.hpp"

#include "invitesim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace invitesim {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::StabilityViolation: return "StabilityViolation";
        case ErrorCode::NonPositiveRate: return "NonPositiveRate";
        case ErrorCode::NonIntegerGamma: return "NonIntegerGamma";
        case ErrorCode::RepeatedEigenvalue: return "RepeatedEigenvalue";
        case ErrorCode::HorizonZero: return "HorizonZero";
        case ErrorCode::ThinningBoundViolated: return "ThinningBoundViolated";
        case ErrorCode::DriverMismatch: return "DriverMismatch";
        case ErrorCode::InvalidInitial: return "InvalidInitial";
        case ErrorCode::NegativeInitialX: return "NegativeInitialX";
        case ErrorCode::NonSymmetricV0: return "NonSymmetricV0";
        case ErrorCode::GridOutsideHorizon: return "GridOutsideHorizon";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::OutputDirUnwritable: return "OutputDirUnwritable";
        case ErrorCode::UnknownPreset: return "UnknownPreset";
    }
    return "Unknown";
}

bool is_integer_gamma(double gamma) noexcept {
    return std::abs(gamma - std::round(gamma)) <= 1e-12 * std::max(1.0, std::abs(gamma));
}

const ModelParams& validate_params(const ModelParams& p, Scheme scheme) {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(p.lambda)) throw Error(ErrorCode::NonPositiveRate, "lambda must be > 0");
    if (!positive(p.scale_r)) throw Error(ErrorCode::NonPositiveRate, "r must be > 0");
    if (!positive(p.beta)) throw Error(ErrorCode::NonPositiveRate, "beta must be > 0");
    if (!positive(p.gamma)) throw Error(ErrorCode::NonPositiveRate, "gamma must be > 0");
    if (!positive(p.epsilon)) throw Error(ErrorCode::NonPositiveRate, "epsilon must be > 0");
    if (!std::isfinite(p.beta_tilde) || p.beta_tilde < 0.0)
        throw Error(ErrorCode::NonPositiveRate, "beta_tilde must be >= 0");

    const double limit = p.gamma * p.gamma * p.beta / 4.0;
    if (!(p.epsilon < limit))
        throw Error(ErrorCode::StabilityViolation,
                    "epsilon = " + std::to_string(p.epsilon) + " must be < gamma^2 beta / 4 = " +
                        std::to_string(limit));

    if (scheme == Scheme::B && !p.randomized_rounding && !is_integer_gamma(p.gamma))
        throw Error(ErrorCode::NonIntegerGamma,
                    "Scheme B needs integer gamma (got " + std::to_string(p.gamma) +
                        ") unless randomized rounding is enabled");
    return p;
}

ArrivalRate ArrivalRate::constant(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw Error(ErrorCode::NonPositiveRate, "arrival rate must be finite and >= 0");
    ArrivalRate a;
    a.kind_ = Kind::Constant;
    a.base_ = rate;
    return a;
}

ArrivalRate ArrivalRate::sinusoid(double base, double amplitude, double period) {
    if (!(period > 0.0)) throw Error(ErrorCode::ConfigInvalid, "sinusoid period must be > 0");
    if (!(base - std::abs(amplitude) >= 0.0))
        throw Error(ErrorCode::NonPositiveRate, "sinusoid must stay nonnegative: base >= |amplitude|");
    ArrivalRate a;
    a.kind_ = Kind::Sinusoid;
    a.base_ = base;
    a.amplitude_ = amplitude;
    a.period_ = period;
    return a;
}

ArrivalRate ArrivalRate::piecewise(std::vector<double> breakpoints, std::vector<double> values) {
    if (values.size() != breakpoints.size() + 1)
        throw Error(ErrorCode::ConfigInvalid, "piecewise rate needs one more value than breakpoints");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
        std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end())
        throw Error(ErrorCode::ConfigInvalid, "breakpoints must be strictly increasing");
    if (!breakpoints.empty() && !(breakpoints.front() > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "breakpoints must be > 0");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::NonPositiveRate, "piecewise values must be finite and >= 0");
    ArrivalRate a;
    a.kind_ = Kind::PiecewiseConstant;
    a.breakpoints_ = std::move(breakpoints);
    a.values_ = std::move(values);
    a.base_ = a.values_.front();
    return a;
}

double ArrivalRate::operator()(double t) const noexcept {
    switch (kind_) {
        case Kind::Constant: return base_;
        case Kind::Sinusoid:
            return base_ + amplitude_ * std::sin(2.0 * std::numbers::pi * t / period_);
        case Kind::PiecewiseConstant: {
            auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
            return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
        }
    }
    return base_;
}

double ArrivalRate::upper_bound(double horizon) const noexcept {
    switch (kind_) {
        case Kind::Constant: return base_;
        case Kind::Sinusoid: return base_ + std::abs(amplitude_);
        case Kind::PiecewiseConstant: {
            double best = values_.front();
            for (std::size_t i = 0; i < breakpoints_.size() && breakpoints_[i] <= horizon; ++i)
                best = std::max(best, values_[i + 1]);
            return best;
        }
    }
    return base_;
}

std::vector<double> ArrivalRate::jumps_before(double horizon) const {
    std::vector<double> out;
    if (kind_ != Kind::PiecewiseConstant) return out;
    for (double b : breakpoints_)
        if (b > 0.0 && b < horizon) out.push_back(b);
    return out;
}

namespace {

double require_number(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_number())
        throw Error(ErrorCode::ConfigInvalid, std::string("missing numeric key '") + key + "'");
    return doc.at(key).get<double>();
}

ArrivalRate arrival_from_json(const nlohmann::json& a, double lambda) {
    const std::string kind = a.value("kind", std::string("constant"));
    if (kind == "constant") return ArrivalRate::constant(a.value("base", lambda));
    if (kind == "sinusoid")
        return ArrivalRate::sinusoid(a.value("base", lambda), a.value("amplitude", 0.0),
                                     a.value("period", 1.0));
    if (kind == "piecewise") {
        return ArrivalRate::piecewise(a.value("breakpoints", std::vector<double>{}),
                                      a.value("values", std::vector<double>{}));
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown arrival kind '" + kind + "'");
}

}  // namespace

ParamsDocument params_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::ConfigInvalid, "params must be a JSON object");
    ParamsDocument out;
    try {
        out.params.lambda = require_number(doc, "lambda");
        out.params.scale_r = require_number(doc, "r");
        out.params.beta = require_number(doc, "beta");
        out.params.beta_tilde = doc.value("beta_tilde", 0.0);
        out.params.gamma = require_number(doc, "gamma");
        out.params.epsilon = require_number(doc, "epsilon");
        out.params.randomized_rounding = doc.value("randomized_rounding", false);
        out.arrival = doc.contains("arrival") ? arrival_from_json(doc.at("arrival"), out.params.lambda)
                                              : ArrivalRate::constant(out.params.lambda);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    return out;
}

nlohmann::json params_to_json(const ModelParams& p, const ArrivalRate& arrival) {
    nlohmann::json a;
    switch (arrival.kind()) {
        case ArrivalRate::Kind::Constant:
            a = {{"kind", "constant"}, {"base", arrival.base()}};
            break;
        case ArrivalRate::Kind::Sinusoid:
            a = {{"kind", "sinusoid"},
                 {"base", arrival.base()},
                 {"amplitude", arrival.amplitude()},
                 {"period", arrival.period()}};
            break;
        case ArrivalRate::Kind::PiecewiseConstant:
            a = {{"kind", "piecewise"},
                 {"breakpoints", arrival.breakpoints()},
                 {"values", arrival.values()}};
            break;
    }
    return {{"lambda", p.lambda},   {"r", p.scale_r},         {"beta", p.beta},
            {"beta_tilde", p.beta_tilde}, {"gamma", p.gamma}, {"epsilon", p.epsilon},
            {"randomized_rounding", p.randomized_rounding}, {"arrival", a}};
}

}  // namespace invitesim
