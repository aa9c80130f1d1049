#pragma once

// BDI-style cloud agent: belief, goal and plan stores, the agenda of active
// sessions, proxy filtering and the per-tick step function.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cloudneg/core.hpp"
#include "cloudneg/utility_tactics.hpp"

namespace cloudneg {

inline constexpr std::size_t kBeliefHistory = 3;

struct IssueBelief {
    std::deque<double> history;  // opponent's offers, oldest first
    std::optional<double> lambda;
    std::optional<Stance> stance;
};

struct SessionBeliefs {
    std::map<std::string, IssueBelief> issues;
    Tick updated_at = 0;
};

struct Beliefset {
    std::map<SessionId, SessionBeliefs> sessions;
    double resource_level = 1.0;
    bool resources_low = false;
};

enum class GoalStatus { Active, Achieved, Abandoned };
std::string_view to_string(GoalStatus s);

struct Goal {
    double target_utility = 1.0;
    GoalStatus status = GoalStatus::Active;
};

class GoalRepository {
public:
    void open(const SessionId& session, double target_utility);
    /// Active -> Achieved/Abandoned. Terminal states are never left.
    void close(const SessionId& session, GoalStatus status);
    GoalStatus status(const SessionId& session) const;
    const Goal* find(const SessionId& session) const;

private:
    std::map<SessionId, Goal> goals_;
};

enum class PlanKind { Idle, MakeOffer, MakeCounter, Accept, Terminate };
enum class Trigger { GoalClosed, DeadlinePassed, AwaitingOpening, OfferMeetsGoal, ResourcesLow, Always };

std::string_view to_string(PlanKind k);
std::string_view to_string(Trigger t);
std::optional<PlanKind> plan_kind_from_string(std::string_view s);
std::optional<Trigger> trigger_from_string(std::string_view s);

struct PlanRule {
    Trigger when = Trigger::Always;
    PlanKind plan = PlanKind::MakeCounter;
    friend bool operator==(const PlanRule&, const PlanRule&) = default;
};

class PlanLibrary {
public:
    PlanLibrary() : PlanLibrary(default_rules()) {}
    /// Rules are tried in order. Throws ValidationError unless the list is
    /// non-empty and ends with an Always rule.
    explicit PlanLibrary(std::vector<PlanRule> rules);

    static std::vector<PlanRule> default_rules();
    const std::vector<PlanRule>& rules() const noexcept { return rules_; }

private:
    std::vector<PlanRule> rules_;
};

struct SessionEntry {
    ProductId product;
    AgentId opponent;
    Perspective role = Perspective::Buyer;
    bool initiator = false;
    ValidatedAgenda agenda;
    std::map<std::string, Range> space;
    Tick commence_at = 0;
    Tick deadline = 0;       // commence_at + session t_max
    Tick t_max_eff = 0;      // absolute, never after deadline
    std::int64_t round = 0;  // highest round sent or received
    std::int64_t last_opponent_round = 0;
    std::int64_t opponent_offers = 0;
    bool opened = false;     // we have sent at least one offer
    std::optional<NegotiationMessage> standing = std::nullopt;  // opponent's latest accepted offer
    Tick standing_at = -1;   // tick the standing offer was received
};

class AgendaDB {
public:
    bool contains(const SessionId& s) const { return sessions_.count(s) != 0; }
    const SessionEntry* find(const SessionId& s) const;
    SessionEntry* find(const SessionId& s);
    /// Throws DuplicateId when the session is already present.
    void insert(const SessionId& s, SessionEntry entry);
    void erase(const SessionId& s) { sessions_.erase(s); }
    const std::map<SessionId, SessionEntry>& sessions() const noexcept { return sessions_; }
    std::map<SessionId, SessionEntry>& sessions() noexcept { return sessions_; }
    bool empty() const noexcept { return sessions_.empty(); }

private:
    std::map<SessionId, SessionEntry> sessions_;
};

struct AgentState {
    AgentId id;
    Perspective role = Perspective::Buyer;
    std::map<ProductId, ValidatedAgenda> agendas;  // declared per product
    Beliefset beliefs;
    GoalRepository goals;
    PlanLibrary plans;
    AgendaDB agenda_db;
    TacticParams tactic;
    ResourceProjection resources;
    std::set<ProductId> agreed;
};

enum class RejectReason { UnknownSession, DeadlineExceeded, OutOfSpace, StaleRound };
std::string_view to_string(RejectReason r);

/// nullopt means the message passes.
using FilterVerdict = std::optional<RejectReason>;

FilterVerdict proxy_filter(const NegotiationMessage& msg, const AgendaDB& db, Tick now);

/// Folds an accepted Offer into the opponent history of its session.
Beliefset update_beliefs(Beliefset beliefs, const NegotiationMessage& msg, Tick now);

/// Weight-averaged concession rate over the session's issues, flat steps
/// counted as 1. nullopt until every issue has a full history.
std::optional<double> session_concession_rate(const Beliefset& beliefs, const SessionId& session,
                                              const ValidatedAgenda& agenda);

PlanKind select_plan(const PlanLibrary& plans, const GoalRepository& goals,
                     const Beliefset& beliefs, const SessionId& session,
                     const SessionEntry& entry, Tick now);

double poll_resources(const ResourceProjection& projection, Tick now);

/// Opens a session from a Commence message addressed to this agent. Throws
/// MissingIssue when the agent has no agenda covering the shared issues.
void open_session(AgentState& state, const NegotiationMessage& commence);

struct Candidate {
    SessionId session;
    double utility = 0.0;
};

struct Resolution {
    SessionId chosen;
    std::vector<SessionId> terminate;
};

/// Highest utility wins, ties to the smallest session id. Every other active
/// session for the chosen session's product is listed for termination.
Resolution resolve_concurrent_agreements(const AgendaDB& db, std::span<const Candidate> candidates);

struct StepEvent {
    enum class Kind { Rejected, Opened, Agreed, Closed, Ignored };
    Kind kind = Kind::Ignored;
    SessionId session;
    AgentId counterparty;
    std::string detail;
};

struct StepResult {
    AgentState state;
    std::vector<NegotiationMessage> outbox;
    std::vector<StepEvent> events;
};

/// Consumes `inbox` (sorted canonically) at tick `now`. Pure in its inputs.
StepResult agent_step(AgentState state, std::span<const NegotiationMessage> inbox, Tick now);

}  // namespace cloudneg
