#include "cloudneg/watchdog.hpp"

#include <algorithm>
#include <string>

namespace cloudneg {

void TrustArchive::put(TrustRecord record) {
    AgentId id = record.agent;
    records_[id] = std::move(record);
}

const TrustRecord* TrustArchive::find(const AgentId& agent) const {
    auto it = records_.find(agent);
    return it == records_.end() ? nullptr : &it->second;
}

double TrustArchive::reputation(const AgentId& agent) const {
    const TrustRecord* r = find(agent);
    return r == nullptr ? kDefaultReputation : r->reputation;
}

double compute_behavior_norm(std::span<const Transcript> transcripts, const AgentId& agent) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (const Transcript& transcript : transcripts) {
        std::map<std::string, std::vector<double>> trail;
        for (const auto& msg : transcript) {
            if (msg.sender != agent || msg.kind() != MessageKind::Offer) continue;
            for (const auto& [issue, value] : msg.package()->values) trail[issue].push_back(value);
        }
        for (const auto& [issue, values] : trail) {
            for (std::size_t i = 2; i < values.size(); ++i) {
                sum += concession_rate(values[i - 2], values[i - 1], values[i]).value_or(1.0);
                ++count;
            }
        }
    }
    if (count == 0) return kDefaultBehaviorNorm;
    return std::max(0.0, sum / static_cast<double>(count));
}

Stance classify_behavior(double behavior_norm) { return classify_rate(behavior_norm); }

double compute_reputation(const ReputationStats& stats) {
    if (stats.closed_sessions <= 0) return kDefaultReputation;
    const double agreement_rate =
        static_cast<double>(stats.agreements) / static_cast<double>(stats.closed_sessions);
    const double compliance_rate =
        stats.messages_sent > 0
            ? 1.0 - static_cast<double>(stats.violations) / static_cast<double>(stats.messages_sent)
            : 1.0;
    // Without an agreement the agent counts as slowest.
    double normalized_rounds = 1.0;
    if (stats.mean_rounds_to_agreement) {
        normalized_rounds = stats.max_rounds_observed > 0
                                ? *stats.mean_rounds_to_agreement /
                                      static_cast<double>(stats.max_rounds_observed)
                                : 0.0;
        normalized_rounds = std::clamp(normalized_rounds, 0.0, 1.0);
    }
    const double r = 0.5 * agreement_rate + 0.3 * compliance_rate + 0.2 * (1.0 - normalized_rounds);
    return std::clamp(r, 0.0, 1.0);
}

}  // namespace cloudneg
