#pragma once

// Scenario documents: YAML describing agents, their agendas and tactics,
// advertisements and RFQs. See docs/scenario-format.md for the schema.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cloudneg/agent.hpp"
#include "cloudneg/core.hpp"
#include "cloudneg/marketplace.hpp"
#include "cloudneg/utility_tactics.hpp"

namespace cloudneg {

/// ParseError carries a 1-based line; ValidationError carries a document path
/// and, when known, the line of the offending node.
class ScenarioError : public Error {
public:
    ScenarioError(Errc code, std::string path, int line, const std::string& reason);

    const std::string& path() const noexcept { return path_; }
    int line() const noexcept { return line_; }  // 0 when unknown
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string path_;
    int line_;
    std::string reason_;
};

struct AgentSpec {
    AgentId id;
    Perspective role = Perspective::Buyer;
    TacticParams tactic;
    /// Half-width of the uniform jitter added to k at simulation start.
    double opening_jitter = 0.0;
    std::map<ProductId, ValidatedAgenda> agendas;
    ResourceProjection resources;
    PlanLibrary plans;
};

struct Scenario {
    std::vector<AgentSpec> agents;  // sorted by id
    std::vector<Advertisement> advertisements;
    std::vector<Rfq> rfqs;
    Tick t_end = 0;
    std::uint64_t seed = 0;
    bool require_overlap = true;
    std::string epoch;  // metadata only

    const AgentSpec* find_agent(const AgentId& id) const;
};

Scenario load_scenario(std::string_view document);
Scenario load_scenario_file(const std::filesystem::path& path);

}  // namespace cloudneg
