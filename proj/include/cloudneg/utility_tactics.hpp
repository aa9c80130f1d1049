#pragma once

// Negotiation mathematics: package utility, the response rule, time-dependent
// offer generation, concession-rate estimation and tactic adaptation.

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cloudneg/core.hpp"

namespace cloudneg {

enum class Stance { Headstrong, Linear, Conceder };
std::string_view to_string(Stance s);

inline constexpr double kMinBeta = 0.05;
inline constexpr double kMaxBeta = 20.0;
/// Half-width of the band around lambda = 1 that counts as linear.
inline constexpr double kLinearBand = 0.05;

double stance_beta(Stance s);

struct TacticParams {
    double k = 0.0;
    double beta = 1.0;
    Stance stance = Stance::Linear;

    static TacticParams for_stance(Stance s, double k = 0.0) { return {k, stance_beta(s), s}; }

    friend bool operator==(const TacticParams&, const TacticParams&) = default;
};

/// Throws InvalidTactic when k or beta is out of bounds.
void validate_tactic(const TacticParams& params);

/// Piecewise-linear resource level over virtual time. Before the first knot
/// and after the last one the level is held constant.
class ResourceSchedule {
public:
    using Knot = std::pair<Tick, double>;

    ResourceSchedule() : knots_{{0, 1.0}} {}
    /// Knots must have strictly increasing ticks and levels in [0,1].
    explicit ResourceSchedule(std::vector<Knot> knots);

    static ResourceSchedule constant(double level) { return ResourceSchedule({{0, level}}); }

    double at(double t) const;
    const std::vector<Knot>& knots() const noexcept { return knots_; }
    /// Schedule seen from `origin`: shifted(o).at(t) == at(o + t).
    ResourceSchedule shifted(Tick origin) const;

private:
    std::vector<Knot> knots_;
};

struct ResourceProjection {
    ResourceSchedule schedule;
    double r_threshold = 0.2;
};

/// Throws InvalidProjection unless 0 < r_threshold < 1.
void validate_projection(const ResourceProjection& projection);

struct Response {
    struct Acquire {
        OfferPackage package;
    };
    struct Terminate {};
    struct Counter {
        OfferPackage package;
    };
    std::variant<Acquire, Terminate, Counter> kind;
};

/// Weighted sum of per-issue scores. Throws MissingIssue or OutOfRange.
double aggregate_utility(const ValidatedAgenda& agenda, const OfferPackage& package,
                         Perspective perspective);

/// aggregate_utility with saturated per-issue scores, for packages that may
/// lie outside the agent's own ranges. Throws MissingIssue.
double evaluate_package(const ValidatedAgenda& agenda, const OfferPackage& package,
                        Perspective perspective);

/// True when every issue value is within the agent's reservation.
bool acceptable_package(const ValidatedAgenda& agenda, const OfferPackage& package,
                        Perspective perspective);

/// Polynomial time function k + (1-k)(t/t_max)^(1/beta); 1.0 once t >= t_max,
/// including the degenerate t_max == 0.
double time_function(double t, Tick t_max, const TacticParams& params);

double generate_offer_value(const IssueSpec& spec, double t, Tick t_max_eff,
                            const TacticParams& params);

/// Exponent used for one issue: below-average weights concede faster.
double issue_beta(double beta, double weight, std::size_t issue_count);

/// One offer per agenda issue at time t, using issue_beta per issue.
OfferPackage generate_offer_package(const ValidatedAgenda& agenda, double t, Tick t_max_eff,
                                    const TacticParams& params);

/// Ratio of the two most recent deltas; nullopt when the earlier step is flat.
std::optional<double> concession_rate(double o_minus2, double o_minus1, double o_now);

Stance classify_rate(double lambda);

TacticParams adapt_tactic(const TacticParams& params, double lambda, std::int64_t round);

/// min(t_max, first tick at which the schedule is at or below r_threshold).
Tick effective_deadline(Tick t_max, const ResourceProjection& projection);

/// Response to an incoming Offer. Terminates once the incoming offer or our
/// own counter would fall after t_max_eff; acquires when the planned counter
/// is worth no more than the incoming package and the incoming package is
/// within reservation; counters otherwise.
Response decide_response(const ValidatedAgenda& agenda, Perspective perspective,
                         const NegotiationMessage& incoming,
                         const OfferPackage& planned_counter, Tick now, Tick t_max_eff);

}  // namespace cloudneg
