#pragma once

// Deterministic tick-driven kernel tying agents and the marketplace together.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cloudneg/agent.hpp"
#include "cloudneg/marketplace.hpp"
#include "cloudneg/scenario.hpp"
#include "cloudneg/watchdog.hpp"

namespace cloudneg {

struct SessionSummary {
    SessionId session;
    ProductId product;
    AgentId buyer;
    AgentId seller;
    std::string outcome;  // agreed | terminated | open
    std::string reason;
    Tick commenced_at = 0;
    Tick closed_at = 0;
    std::int64_t rounds = 0;
    double buyer_utility = 0.0;
    double seller_utility = 0.0;
    OfferPackage agreement;
};

struct AgentSummary {
    AgentId agent;
    Perspective role = Perspective::Buyer;
    double behavior_norm = kDefaultBehaviorNorm;
    Stance behavior = Stance::Linear;
    double reputation = kDefaultReputation;
    std::int64_t sessions = 0;
    std::int64_t agreements = 0;
    std::int64_t messages_sent = 0;
    std::int64_t violations = 0;
};

struct SimulationReport {
    std::vector<SessionSummary> sessions;
    std::vector<AgentSummary> agents;
    Tick ticks = 0;
    std::uint64_t seed = 0;
};

struct SimulationResult {
    Transcript transcript;  // every routed message, by (sent_at, session)
    SimulationReport report;
    TrustArchive trust;
    NegotiationEngine engine;
    std::vector<AgentState> agents;  // final states, by id
};

/// Builds the initial agent state for a scenario agent. `k_jitter` is added
/// to the opening fraction and clamped into [0,1].
AgentState make_agent_state(const AgentSpec& spec, double k_jitter = 0.0);

SimulationResult run_simulation(const Scenario& scenario,
                                std::optional<std::uint64_t> seed_override = std::nullopt);

/// Stable text table followed by a JSON-lines record block.
std::string emit_report(const SimulationReport& report);

}  // namespace cloudneg
