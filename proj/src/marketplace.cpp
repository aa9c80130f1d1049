#include "cloudneg/marketplace.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace cloudneg {

namespace {

template <typename Entry>
void check_issue_ranges(const std::vector<IssueRange>& issues, const Entry& entry,
                        std::string_view what) {
    if (issues.empty()) {
        throw Error(Errc::ValidationError, fmt::format("{} lists no issues", what));
    }
    std::set<std::string> seen;
    for (const auto& issue : issues) {
        if (!seen.insert(issue.issue_id).second) {
            throw Error(Errc::ValidationError,
                        fmt::format("{} lists issue '{}' twice", what, issue.issue_id));
        }
        if (!(issue.range.min < issue.range.max)) {
            throw Error(Errc::BadRange, fmt::format("{} issue '{}' has an empty range", what,
                                                    issue.issue_id));
        }
    }
    (void)entry;
}

std::string next_free_id(const std::set<std::string>& used, std::string_view prefix,
                         std::size_t start) {
    for (std::size_t n = start;; ++n) {
        std::string id = fmt::format("{}-{}", prefix, n);
        if (!used.count(id)) return id;
    }
}

const Range* range_of(const std::vector<IssueRange>& issues, const std::string& id) {
    for (const auto& i : issues)
        if (i.issue_id == id) return &i.range;
    return nullptr;
}

}  // namespace

std::string AdvertisementRepository::submit_advertisement(Advertisement ad) {
    if (!is_registered(ad.agent)) {
        throw Error(Errc::UnknownAgent, fmt::format("agent '{}' is not registered", ad.agent.str()));
    }
    check_issue_ranges(ad.issues, ad, "advertisement");
    if (ad.ad_id.empty()) {
        ad.ad_id = next_free_id(ids_, "ad", ads_.size() + 1);
    } else if (ids_.count(ad.ad_id)) {
        throw Error(Errc::DuplicateId, fmt::format("id '{}' already used", ad.ad_id));
    }
    ids_.insert(ad.ad_id);
    ads_.push_back(std::move(ad));
    return ads_.back().ad_id;
}

std::string AdvertisementRepository::submit_rfq(Rfq rfq) {
    if (!is_registered(rfq.agent)) {
        throw Error(Errc::UnknownAgent, fmt::format("agent '{}' is not registered", rfq.agent.str()));
    }
    check_issue_ranges(rfq.issues, rfq, "rfq");
    if (!(rfq.min_reputation >= 0.0 && rfq.min_reputation <= 1.0)) {
        throw Error(Errc::ValidationError,
                    fmt::format("rfq min_reputation {} outside [0,1]", rfq.min_reputation));
    }
    if (rfq.rfq_id.empty()) {
        rfq.rfq_id = next_free_id(ids_, "rfq", rfqs_.size() + 1);
    } else if (ids_.count(rfq.rfq_id)) {
        throw Error(Errc::DuplicateId, fmt::format("id '{}' already used", rfq.rfq_id));
    }
    ids_.insert(rfq.rfq_id);
    rfqs_.push_back(std::move(rfq));
    return rfqs_.back().rfq_id;
}

std::vector<Advertisement> AdvertisementRepository::query_advertisements(
    const AdFilter& filter) const {
    std::vector<Advertisement> out;
    for (const auto& ad : ads_) {
        if (filter.agent && ad.agent != *filter.agent) continue;
        if (filter.product && ad.product != *filter.product) continue;
        if (filter.issues) {
            bool all = std::all_of(filter.issues->begin(), filter.issues->end(),
                                   [&](const std::string& id) { return range_of(ad.issues, id); });
            if (!all) continue;
        }
        out.push_back(ad);
    }
    std::stable_sort(out.begin(), out.end(), [](const Advertisement& a, const Advertisement& b) {
        return a.posted_at < b.posted_at;
    });
    return out;
}

const Advertisement* AdvertisementRepository::find_ad(const std::string& id) const {
    for (const auto& ad : ads_)
        if (ad.ad_id == id) return &ad;
    return nullptr;
}

const Rfq* AdvertisementRepository::find_rfq(const std::string& id) const {
    for (const auto& r : rfqs_)
        if (r.rfq_id == id) return &r;
    return nullptr;
}

void AdvertisementRepository::mark_matched(const std::string& rfq_id, const std::string& ad_id) {
    matched_.emplace(rfq_id, ad_id);
}

bool AdvertisementRepository::is_matched(const std::string& rfq_id,
                                         const std::string& ad_id) const {
    return matched_.count({rfq_id, ad_id}) != 0;
}

std::optional<Match> try_match(const Rfq& rfq, const Advertisement& ad, const TrustArchive& trust,
                               const MatchOptions& options) {
    if (options.now && (rfq.posted_at > *options.now || ad.posted_at > *options.now)) {
        return std::nullopt;
    }
    if (rfq.product != ad.product) return std::nullopt;
    if (rfq.role == ad.role) return std::nullopt;
    Match m{rfq.rfq_id, ad.ad_id, {}};
    for (const auto& issue : rfq.issues) {
        const Range* theirs = range_of(ad.issues, issue.issue_id);
        if (theirs == nullptr) return std::nullopt;
        if (options.require_overlap &&
            std::max(issue.range.min, theirs->min) > std::min(issue.range.max, theirs->max)) {
            return std::nullopt;
        }
        m.shared_issues.push_back(issue.issue_id);
    }
    if (trust.reputation(ad.agent) < rfq.min_reputation) return std::nullopt;
    return m;
}

std::vector<Match> match_alliances(const AdvertisementRepository& repo, const TrustArchive& trust,
                                   const MatchOptions& options) {
    std::vector<Match> out;
    for (const auto& rfq : repo.rfqs()) {
        for (const auto& ad : repo.advertisements()) {
            if (repo.is_matched(rfq.rfq_id, ad.ad_id)) continue;
            if (auto m = try_match(rfq, ad, trust, options)) out.push_back(std::move(*m));
        }
    }
    return out;
}

NegotiationEngine::Commenced NegotiationEngine::commence_negotiation(
    const Match& match, const AdvertisementRepository& repo, Tick now) {
    const Rfq* rfq = repo.find_rfq(match.rfq_id);
    const Advertisement* ad = repo.find_ad(match.ad_id);
    if (rfq == nullptr || ad == nullptr) {
        throw Error(Errc::ValidationError,
                    fmt::format("match ({}, {}) does not resolve", match.rfq_id, match.ad_id));
    }
    const bool rfq_buys = rfq->role == Perspective::Buyer;
    const AgentId& buyer = rfq_buys ? rfq->agent : ad->agent;
    const AgentId& seller = rfq_buys ? ad->agent : rfq->agent;
    if (has_agreed(buyer, rfq->product) || has_agreed(seller, rfq->product)) {
        throw Error(Errc::AlreadyAgreed,
                    fmt::format("a party of ({}, {}) already agreed on '{}'", match.rfq_id,
                                match.ad_id, rfq->product.str()));
    }

    SessionState s;
    s.session = SessionId(fmt::format("s-{:04}", next_session_++));
    s.product = rfq->product;
    s.buyer = buyer;
    s.seller = seller;
    s.rfq_id = rfq->rfq_id;
    s.ad_id = ad->ad_id;
    s.issues = match.shared_issues;
    for (const auto& id : match.shared_issues) {
        const Range* a = range_of(rfq->issues, id);
        const Range* b = range_of(ad->issues, id);
        s.space[id] = Range{std::min(a->min, b->min), std::max(a->max, b->max)};
    }
    s.commence_at = now;
    s.t_max = std::min(rfq->t_max, ad->t_max);
    s.outcome = OutcomeOpen{};

    CommencePayload info{s.product, buyer, seller, s.space, s.t_max};
    Commenced out{s.session, {}};
    for (const AgentId* to : {&buyer, &seller}) {
        out.messages.push_back(NegotiationMessage{s.session, AgentId(std::string(kMarketplaceId)),
                                                  *to, 0, now, Commence{info}});
    }
    s.transcript = out.messages;
    sessions_.emplace(s.session, std::move(s));
    return out;
}

DeliveryResult NegotiationEngine::route_message(const NegotiationMessage& msg) {
    auto it = sessions_.find(msg.session);
    if (it == sessions_.end()) {
        throw Error(Errc::UnknownSession, fmt::format("no session '{}'", msg.session.str()));
    }
    SessionState& s = it->second;
    if (!s.open()) {
        throw Error(Errc::SessionClosed, fmt::format("session '{}' is closed", msg.session.str()));
    }
    if (!s.transcript.empty() && msg.sent_at < s.transcript.back().sent_at) {
        throw Error(Errc::ClockRegression,
                    fmt::format("message at {} precedes transcript tail at {}", msg.sent_at,
                                s.transcript.back().sent_at));
    }
    if (msg.kind() == MessageKind::Commence) {
        throw Error(Errc::ValidationError, "agents cannot route Commence messages");
    }

    // Compliance bookkeeping for the watchdog.
    ComplianceStats& stats = compliance_[msg.sender];
    stats.messages_sent += 1;
    bool violation = false;
    std::int64_t& last = s.last_round[msg.sender];
    if (msg.round <= last) violation = true;
    last = std::max(last, msg.round);
    if (msg.kind() == MessageKind::Offer) {
        const OfferPackage& pkg = *msg.package();
        if (msg.sent_at > s.deadline() || pkg.values.size() != s.space.size()) violation = true;
        for (const auto& [issue, value] : pkg.values) {
            auto r = s.space.find(issue);
            if (r == s.space.end() || value < r->second.min || value > r->second.max) {
                violation = true;
            }
        }
    }
    if (violation) stats.violations += 1;

    switch (msg.kind()) {
        case MessageKind::Offer:
            s.transcript.push_back(msg);
            s.offers += 1;
            return DeliveryResult::Delivered;
        case MessageKind::Acquire:
            if (has_agreed(s.buyer, s.product) || has_agreed(s.seller, s.product)) {
                close_with_notice(s, "already-agreed", msg.sent_at);
                return DeliveryResult::Superseded;
            }
            s.transcript.push_back(msg);
            s.outcome = OutcomeAgreed{*msg.package(), msg.sent_at};
            agreed_.emplace(s.buyer, s.product);
            agreed_.emplace(s.seller, s.product);
            ++closures_;
            return DeliveryResult::Agreed;
        case MessageKind::Terminate:
            s.transcript.push_back(msg);
            s.outcome = OutcomeTerminated{std::get<Terminate>(msg.body).reason, msg.sent_at};
            ++closures_;
            return DeliveryResult::Terminated;
        case MessageKind::Commence:
            break;
    }
    return DeliveryResult::Delivered;
}

void NegotiationEngine::close_with_notice(SessionState& s, const std::string& reason, Tick at) {
    std::int64_t round = 0;
    for (const auto& m : s.transcript) round = std::max(round, m.round);
    for (const AgentId* to : {&s.buyer, &s.seller}) {
        NegotiationMessage notice{s.session, AgentId(std::string(kMarketplaceId)), *to, round + 1,
                                  at, Terminate{reason}};
        s.transcript.push_back(notice);
        notices_.push_back(std::move(notice));
    }
    s.outcome = OutcomeTerminated{reason, at};
    ++closures_;
}

void NegotiationEngine::expire(Tick now) {
    for (auto& [id, s] : sessions_) {
        if (s.open() && s.deadline() < now) close_with_notice(s, "expired", now);
    }
}

void NegotiationEngine::close_all(const std::string& reason, Tick now) {
    for (auto& [id, s] : sessions_) {
        if (s.open()) close_with_notice(s, reason, now);
    }
}

std::vector<NegotiationMessage> NegotiationEngine::drain_notices() {
    return std::exchange(notices_, {});
}

bool NegotiationEngine::has_agreed(const AgentId& agent, const ProductId& product) const {
    return agreed_.count({agent, product}) != 0;
}

bool NegotiationEngine::any_open() const {
    return std::any_of(sessions_.begin(), sessions_.end(),
                       [](const auto& kv) { return kv.second.open(); });
}

const SessionState* NegotiationEngine::find(const SessionId& s) const {
    auto it = sessions_.find(s);
    return it == sessions_.end() ? nullptr : &it->second;
}

TrustArchive recompute_trust(const NegotiationEngine& engine, const std::vector<AgentId>& agents) {
    std::vector<Transcript> closed;
    std::int64_t max_rounds = 0;
    for (const auto& [id, s] : engine.sessions()) {
        if (s.open()) continue;
        closed.push_back(s.transcript);
        max_rounds = std::max(max_rounds, s.offers);
    }

    TrustArchive archive;
    for (const AgentId& agent : agents) {
        TrustRecord rec;
        rec.agent = agent;
        ReputationStats stats;
        stats.max_rounds_observed = max_rounds;
        double rounds_sum = 0.0;
        for (const auto& [id, s] : engine.sessions()) {
            if (s.open() || (s.buyer != agent && s.seller != agent)) continue;
            stats.closed_sessions += 1;
            if (std::holds_alternative<OutcomeAgreed>(s.outcome)) {
                stats.agreements += 1;
                rounds_sum += static_cast<double>(s.offers);
            }
        }
        if (stats.agreements > 0) {
            stats.mean_rounds_to_agreement = rounds_sum / static_cast<double>(stats.agreements);
        }
        if (auto c = engine.compliance().find(agent); c != engine.compliance().end()) {
            stats.messages_sent = c->second.messages_sent;
            stats.violations = c->second.violations;
        }
        rec.behavior_norm = compute_behavior_norm(closed, agent);
        rec.reputation = compute_reputation(stats);
        rec.sessions_observed = stats.closed_sessions;
        rec.agreement_count = stats.agreements;
        rec.compliance_violations = stats.violations;
        rec.messages_sent = stats.messages_sent;
        rec.mean_rounds_to_agreement = stats.mean_rounds_to_agreement;
        archive.put(std::move(rec));
    }
    return archive;
}

}  // namespace cloudneg
