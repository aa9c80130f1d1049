#pragma once

// Marketplace: advertisement/RFQ repository, alliance matchmaking, and the
// negotiation engine that owns session lifecycles and transcripts.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cloudneg/core.hpp"
#include "cloudneg/watchdog.hpp"

namespace cloudneg {

struct IssueRange {
    std::string issue_id;
    Range range;
};

struct Advertisement {
    std::string ad_id;  // assigned on submission when empty
    AgentId agent;
    ProductId product;
    Perspective role = Perspective::Seller;
    std::vector<IssueRange> issues;
    Tick t_max = 0;  // declared negotiation deadline
    Tick posted_at = 0;
};

struct Rfq {
    std::string rfq_id;  // assigned on submission when empty
    AgentId agent;
    ProductId product;
    Perspective role = Perspective::Buyer;
    std::vector<IssueRange> issues;
    double min_reputation = 0.0;
    Tick t_max = 0;
    Tick posted_at = 0;
};

struct AdFilter {
    std::optional<AgentId> agent;
    std::optional<ProductId> product;
    /// Ads must carry every listed issue.
    std::optional<std::vector<std::string>> issues;
};

class AdvertisementRepository {
public:
    void register_agent(const AgentId& agent) { agents_.insert(agent); }
    bool is_registered(const AgentId& agent) const { return agents_.count(agent) != 0; }

    /// Throws UnknownAgent, DuplicateId or ValidationError.
    std::string submit_advertisement(Advertisement ad);
    std::string submit_rfq(Rfq rfq);

    /// Ads matching every supplied criterion, by posted_at then submission.
    std::vector<Advertisement> query_advertisements(const AdFilter& filter) const;

    const std::vector<Advertisement>& advertisements() const noexcept { return ads_; }
    const std::vector<Rfq>& rfqs() const noexcept { return rfqs_; }
    const Advertisement* find_ad(const std::string& id) const;
    const Rfq* find_rfq(const std::string& id) const;

    void mark_matched(const std::string& rfq_id, const std::string& ad_id);
    bool is_matched(const std::string& rfq_id, const std::string& ad_id) const;

private:
    std::set<AgentId> agents_;
    std::vector<Advertisement> ads_;  // submission order
    std::vector<Rfq> rfqs_;
    std::set<std::string> ids_;
    std::set<std::pair<std::string, std::string>> matched_;
};

struct Match {
    std::string rfq_id;
    std::string ad_id;
    std::vector<std::string> shared_issues;  // RFQ order

    friend bool operator==(const Match&, const Match&) = default;
};

struct MatchOptions {
    bool require_overlap = true;
    /// Only entries posted at or before this tick are considered.
    std::optional<Tick> now;
};

/// Checks one (RFQ, ad) pair against the matchmaking predicates.
std::optional<Match> try_match(const Rfq& rfq, const Advertisement& ad,
                               const TrustArchive& trust, const MatchOptions& options);

/// Every not-yet-matched pair satisfying the predicates, ordered by RFQ then ad
/// submission.
std::vector<Match> match_alliances(const AdvertisementRepository& repo, const TrustArchive& trust,
                                   const MatchOptions& options = {});

struct OutcomeOpen {};
struct OutcomeAgreed {
    OfferPackage package;
    Tick at = 0;
};
struct OutcomeTerminated {
    std::string reason;
    Tick at = 0;
};
using Outcome = std::variant<OutcomeOpen, OutcomeAgreed, OutcomeTerminated>;

struct SessionState {
    SessionId session;
    ProductId product;
    AgentId buyer;
    AgentId seller;
    std::string rfq_id;
    std::string ad_id;
    std::vector<std::string> issues;
    std::map<std::string, Range> space;
    Tick commence_at = 0;
    Tick t_max = 0;  // relative to commence_at
    Transcript transcript;
    Outcome outcome;
    std::int64_t offers = 0;
    std::map<AgentId, std::int64_t> last_round;

    bool open() const { return std::holds_alternative<OutcomeOpen>(outcome); }
    Tick deadline() const { return commence_at + t_max; }
};

enum class DeliveryResult { Delivered, Agreed, Terminated, Superseded };

struct ComplianceStats {
    std::int64_t messages_sent = 0;
    std::int64_t violations = 0;
};

class NegotiationEngine {
public:
    struct Commenced {
        SessionId session;
        std::vector<NegotiationMessage> messages;  // Commence to buyer, then seller
    };

    /// Throws AlreadyAgreed when either party already closed a deal on the
    /// product, ValidationError when the match does not resolve.
    Commenced commence_negotiation(const Match& match, const AdvertisementRepository& repo,
                                   Tick now);

    /// Appends to the transcript. Acquire and Terminate close the session;
    /// an Acquire for a party that already agreed on the product closes the
    /// session as superseded and queues marketplace notices instead. Throws
    /// UnknownSession, SessionClosed or ClockRegression.
    DeliveryResult route_message(const NegotiationMessage& msg);

    /// Closes open sessions whose deadline lies before `now`.
    void expire(Tick now);
    /// Closes every open session.
    void close_all(const std::string& reason, Tick now);

    /// Marketplace-originated messages produced since the last call.
    std::vector<NegotiationMessage> drain_notices();

    bool has_agreed(const AgentId& agent, const ProductId& product) const;
    bool any_open() const;
    const std::map<SessionId, SessionState>& sessions() const noexcept { return sessions_; }
    const SessionState* find(const SessionId& s) const;
    const std::map<AgentId, ComplianceStats>& compliance() const noexcept { return compliance_; }
    std::size_t closures() const noexcept { return closures_; }

private:
    void close_with_notice(SessionState& s, const std::string& reason, Tick at);

    std::map<SessionId, SessionState> sessions_;
    std::set<std::pair<AgentId, ProductId>> agreed_;
    std::map<AgentId, ComplianceStats> compliance_;
    std::vector<NegotiationMessage> notices_;
    std::size_t next_session_ = 1;
    std::size_t closures_ = 0;
};

/// Rebuilds every agent's trust record from the engine's closed sessions.
TrustArchive recompute_trust(const NegotiationEngine& engine, const std::vector<AgentId>& agents);

}  // namespace cloudneg
