#include "cloudneg/utility_tactics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace cloudneg {

std::string_view to_string(Stance s) {
    switch (s) {
        case Stance::Headstrong: return "headstrong";
        case Stance::Linear: return "linear";
        case Stance::Conceder: return "conceder";
    }
    return "?";
}

double stance_beta(Stance s) {
    switch (s) {
        case Stance::Headstrong: return 0.2;
        case Stance::Linear: return 1.0;
        case Stance::Conceder: return 5.0;
    }
    return 1.0;
}

void validate_tactic(const TacticParams& params) {
    if (!(params.k >= 0.0 && params.k <= 1.0)) {
        throw Error(Errc::InvalidTactic, fmt::format("k = {} outside [0,1]", params.k));
    }
    if (!(params.beta >= kMinBeta && params.beta <= kMaxBeta)) {
        throw Error(Errc::InvalidTactic,
                    fmt::format("beta = {} outside [{}, {}]", params.beta, kMinBeta, kMaxBeta));
    }
}

ResourceSchedule::ResourceSchedule(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) {
        throw Error(Errc::InvalidProjection, "resource schedule needs at least one point");
    }
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        const auto [t, level] = knots_[i];
        if (!(level >= 0.0 && level <= 1.0)) {
            throw Error(Errc::InvalidProjection,
                        fmt::format("resource level {} at t={} outside [0,1]", level, t));
        }
        if (i > 0 && t <= knots_[i - 1].first) {
            throw Error(Errc::InvalidProjection, "resource schedule ticks must increase");
        }
    }
}

double ResourceSchedule::at(double t) const {
    if (t <= static_cast<double>(knots_.front().first)) return knots_.front().second;
    if (t >= static_cast<double>(knots_.back().first)) return knots_.back().second;
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), t, [](double v, const Knot& k) {
        return v < static_cast<double>(k.first);
    });
    auto lo = std::prev(hi);
    const double t0 = static_cast<double>(lo->first);
    const double t1 = static_cast<double>(hi->first);
    return lo->second + (hi->second - lo->second) * (t - t0) / (t1 - t0);
}

ResourceSchedule ResourceSchedule::shifted(Tick origin) const {
    if (origin == 0) return *this;
    // Evaluate at the origin and keep later knots, re-based to the origin.
    std::vector<Knot> out{{0, at(static_cast<double>(origin))}};
    for (const auto& [t, level] : knots_) {
        if (t > origin) out.emplace_back(t - origin, level);
    }
    return ResourceSchedule(std::move(out));
}

void validate_projection(const ResourceProjection& projection) {
    if (!(projection.r_threshold > 0.0 && projection.r_threshold < 1.0)) {
        throw Error(Errc::InvalidProjection,
                    fmt::format("r_threshold {} outside (0,1)", projection.r_threshold));
    }
}

namespace {

const double& value_for(const IssueSpec& spec, const OfferPackage& package) {
    auto it = package.values.find(spec.issue_id);
    if (it == package.values.end()) {
        throw Error(Errc::MissingIssue,
                    fmt::format("package has no value for issue '{}'", spec.issue_id));
    }
    return it->second;
}

}  // namespace

double aggregate_utility(const ValidatedAgenda& agenda, const OfferPackage& package,
                         Perspective perspective) {
    double u = 0.0;
    for (const auto& spec : agenda.issues()) {
        u += issue_score(spec, value_for(spec, package), perspective).value() * spec.weight;
    }
    return std::clamp(u, 0.0, 1.0);
}

double evaluate_package(const ValidatedAgenda& agenda, const OfferPackage& package,
                        Perspective perspective) {
    double u = 0.0;
    for (const auto& spec : agenda.issues()) {
        u += saturated_score(spec, value_for(spec, package), perspective).value() * spec.weight;
    }
    return std::clamp(u, 0.0, 1.0);
}

bool acceptable_package(const ValidatedAgenda& agenda, const OfferPackage& package,
                        Perspective perspective) {
    return std::all_of(agenda.issues().begin(), agenda.issues().end(), [&](const IssueSpec& s) {
        return within_reservation(s, value_for(s, package), perspective);
    });
}

double time_function(double t, Tick t_max, const TacticParams& params) {
    if (t_max <= 0 || t >= static_cast<double>(t_max)) return 1.0;
    const double frac = std::max(t, 0.0) / static_cast<double>(t_max);
    return params.k + (1.0 - params.k) * std::pow(frac, 1.0 / params.beta);
}

double generate_offer_value(const IssueSpec& spec, double t, Tick t_max_eff,
                            const TacticParams& params) {
    const double f = time_function(t, t_max_eff, params);
    const double span = spec.max_value - spec.min_value;
    const double v = spec.direction == Direction::Ascending ? spec.min_value + f * span
                                                            : spec.min_value + (1.0 - f) * span;
    return std::clamp(v, spec.min_value, spec.max_value);
}

double issue_beta(double beta, double weight, std::size_t issue_count) {
    const double scale = 1.0 / (static_cast<double>(issue_count) * weight);
    return std::clamp(beta * scale, kMinBeta, kMaxBeta);
}

OfferPackage generate_offer_package(const ValidatedAgenda& agenda, double t, Tick t_max_eff,
                                    const TacticParams& params) {
    OfferPackage out;
    const auto n = agenda.issues().size();
    for (const auto& spec : agenda.issues()) {
        TacticParams p = params;
        p.beta = issue_beta(params.beta, spec.weight, n);
        out.values[spec.issue_id] = generate_offer_value(spec, t, t_max_eff, p);
    }
    return out;
}

std::optional<double> concession_rate(double o_minus2, double o_minus1, double o_now) {
    const double denom = o_minus1 - o_minus2;
    if (denom == 0.0) return std::nullopt;
    return (o_now - o_minus1) / denom;
}

Stance classify_rate(double lambda) {
    if (lambda < 1.0 - kLinearBand) return Stance::Headstrong;
    if (lambda > 1.0 + kLinearBand) return Stance::Conceder;
    return Stance::Linear;
}

TacticParams adapt_tactic(const TacticParams& params, double lambda, std::int64_t round) {
    if (round < 3) return params;
    switch (classify_rate(lambda)) {
        case Stance::Conceder:
            // Imitate the opponent's concession speed.
            return {params.k, std::clamp(lambda, kMinBeta, kMaxBeta), Stance::Conceder};
        case Stance::Headstrong:
            return {params.k, stance_beta(Stance::Conceder), Stance::Conceder};
        case Stance::Linear:
            break;
    }
    return params;
}

Tick effective_deadline(Tick t_max, const ResourceProjection& projection) {
    // Small slack absorbs interpolation rounding at exact crossings.
    constexpr double kSlack = 1e-12;
    for (Tick t = 0; t < t_max; ++t) {
        if (projection.schedule.at(static_cast<double>(t)) <= projection.r_threshold + kSlack) {
            return t;
        }
    }
    return t_max;
}

Response decide_response(const ValidatedAgenda& agenda, Perspective perspective,
                         const NegotiationMessage& incoming,
                         const OfferPackage& planned_counter, Tick now, Tick t_max_eff) {
    if (incoming.sent_at > t_max_eff || now > t_max_eff) {
        return {Response::Terminate{}};
    }
    const OfferPackage* offered = incoming.package();
    if (offered == nullptr) {
        throw Error(Errc::MissingIssue, "incoming message carries no offer");
    }
    const double u_counter = aggregate_utility(agenda, planned_counter, perspective);
    if (acceptable_package(agenda, *offered, perspective) &&
        u_counter <= evaluate_package(agenda, *offered, perspective)) {
        return {Response::Acquire{*offered}};
    }
    return {Response::Counter{planned_counter}};
}

}  // namespace cloudneg
