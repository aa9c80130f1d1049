#pragma once

// Behavior watchdog: Behavior Norm (mean observed concession rate) and
// Reputation Index scores per agent.

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cloudneg/core.hpp"
#include "cloudneg/utility_tactics.hpp"

namespace cloudneg {

using Transcript = std::vector<NegotiationMessage>;

inline constexpr double kDefaultBehaviorNorm = 1.0;
inline constexpr double kDefaultReputation = 0.5;

struct TrustRecord {
    AgentId agent;
    double behavior_norm = kDefaultBehaviorNorm;  // B
    double reputation = kDefaultReputation;       // R
    std::int64_t sessions_observed = 0;
    std::int64_t agreement_count = 0;
    std::int64_t compliance_violations = 0;
    std::int64_t messages_sent = 0;
    std::optional<double> mean_rounds_to_agreement;
};

class TrustArchive {
public:
    void put(TrustRecord record);
    const TrustRecord* find(const AgentId& agent) const;
    /// Unknown agents get the default reputation.
    double reputation(const AgentId& agent) const;
    const std::map<AgentId, TrustRecord>& records() const noexcept { return records_; }

private:
    std::map<AgentId, TrustRecord> records_;
};

/// Mean concession rate over the agent's own consecutive offer triples, per
/// issue, across the given transcripts. Flat steps count as 1. Defaults to 1
/// when no triple exists; never negative.
double compute_behavior_norm(std::span<const Transcript> transcripts, const AgentId& agent);

Stance classify_behavior(double behavior_norm);

struct ReputationStats {
    std::int64_t closed_sessions = 0;
    std::int64_t agreements = 0;
    std::int64_t messages_sent = 0;
    std::int64_t violations = 0;
    std::optional<double> mean_rounds_to_agreement;
    std::int64_t max_rounds_observed = 0;
};

/// 0.5 agreement rate + 0.3 compliance rate + 0.2 speed, clamped to [0,1].
/// Agents with no closed sessions get 0.5.
double compute_reputation(const ReputationStats& stats);

}  // namespace cloudneg
