#include "cloudneg/simulation.hpp"

#include <algorithm>
#include <random>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace cloudneg {

AgentState make_agent_state(const AgentSpec& spec, double k_jitter) {
    AgentState s;
    s.id = spec.id;
    s.role = spec.role;
    s.agendas = spec.agendas;
    s.plans = spec.plans;
    s.tactic = spec.tactic;
    s.tactic.k = std::clamp(spec.tactic.k + k_jitter, 0.0, 1.0);
    s.resources = spec.resources;
    return s;
}

namespace {

/// Uniform draw in [0,1) from the top 53 bits, identical on every platform.
double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Routing order for one tick's outgoing messages. Acquires go first; when
/// several counterparties acquire from the same agent on the same product,
/// the one that agent values most goes ahead and the others fall back to the
/// marketplace's already-agreed guard.
std::vector<NegotiationMessage> routing_order(std::vector<NegotiationMessage> outgoing,
                                              const std::map<AgentId, AgentState>& agents,
                                              const NegotiationEngine& engine) {
    std::sort(outgoing.begin(), outgoing.end(), canonical_less);
    std::vector<const NegotiationMessage*> acquires;
    std::vector<NegotiationMessage> rest;
    for (const auto& m : outgoing) {
        if (m.kind() == MessageKind::Acquire) acquires.push_back(&m);
    }

    std::set<const NegotiationMessage*> deferred;
    for (const auto& [id, state] : agents) {
        std::map<ProductId, std::vector<const NegotiationMessage*>> incoming;
        std::set<ProductId> own;
        for (const auto* m : acquires) {
            const SessionState* s = engine.find(m->session);
            if (s == nullptr) continue;
            if (m->sender == id) own.insert(s->product);
            if (m->receiver == id) incoming[s->product].push_back(m);
        }
        for (const auto& [product, msgs] : incoming) {
            if (own.count(product)) {
                deferred.insert(msgs.begin(), msgs.end());
                continue;
            }
            if (msgs.size() < 2) continue;
            std::vector<Candidate> candidates;
            for (const auto* m : msgs) {
                const SessionEntry* e = state.agenda_db.find(m->session);
                if (e == nullptr) continue;
                candidates.push_back({m->session, evaluate_package(e->agenda, *m->package(), e->role)});
            }
            if (candidates.empty()) continue;
            const Resolution res = resolve_concurrent_agreements(state.agenda_db, candidates);
            for (const auto* m : msgs) {
                if (m->session != res.chosen) deferred.insert(m);
            }
        }
    }

    std::vector<NegotiationMessage> order;
    order.reserve(outgoing.size());
    for (const auto* m : acquires)
        if (!deferred.count(m)) order.push_back(*m);
    for (const auto* m : acquires)
        if (deferred.count(m)) order.push_back(*m);
    for (const auto& m : outgoing)
        if (m.kind() != MessageKind::Acquire) order.push_back(m);
    return order;
}

bool can_still_match(const AdvertisementRepository& repo, const TrustArchive& trust,
                     const MatchOptions& options, const NegotiationEngine& engine, Tick now) {
    for (const auto& ad : repo.advertisements())
        if (ad.posted_at > now) return true;
    for (const auto& rfq : repo.rfqs())
        if (rfq.posted_at > now) return true;
    for (const auto& m : match_alliances(repo, trust, options)) {
        const Rfq* rfq = repo.find_rfq(m.rfq_id);
        const Advertisement* ad = repo.find_ad(m.ad_id);
        if (!engine.has_agreed(rfq->agent, rfq->product) &&
            !engine.has_agreed(ad->agent, ad->product)) {
            return true;
        }
    }
    return false;
}

std::string outcome_name(const Outcome& o) {
    if (std::holds_alternative<OutcomeAgreed>(o)) return "agreed";
    if (std::holds_alternative<OutcomeTerminated>(o)) return "terminated";
    return "open";
}

SimulationReport build_report(const Scenario& sc, const NegotiationEngine& engine,
                              const TrustArchive& trust, Tick ticks, std::uint64_t seed) {
    SimulationReport report;
    report.ticks = ticks;
    report.seed = seed;
    for (const auto& [id, s] : engine.sessions()) {
        SessionSummary row;
        row.session = id;
        row.product = s.product;
        row.buyer = s.buyer;
        row.seller = s.seller;
        row.outcome = outcome_name(s.outcome);
        row.commenced_at = s.commence_at;
        row.rounds = s.offers;
        if (const auto* a = std::get_if<OutcomeAgreed>(&s.outcome)) {
            row.closed_at = a->at;
            row.agreement = a->package;
            auto utility = [&](const AgentId& who, Perspective p) {
                const AgentSpec* spec = sc.find_agent(who);
                const ValidatedAgenda agenda =
                    restrict_agenda(spec->agendas.at(s.product), s.issues, s.t_max);
                return evaluate_package(agenda, a->package, p);
            };
            row.buyer_utility = utility(s.buyer, Perspective::Buyer);
            row.seller_utility = utility(s.seller, Perspective::Seller);
        } else if (const auto* t = std::get_if<OutcomeTerminated>(&s.outcome)) {
            row.closed_at = t->at;
            row.reason = t->reason;
        }
        report.sessions.push_back(std::move(row));
    }
    for (const auto& spec : sc.agents) {
        AgentSummary a;
        a.agent = spec.id;
        a.role = spec.role;
        if (const TrustRecord* r = trust.find(spec.id)) {
            a.behavior_norm = r->behavior_norm;
            a.reputation = r->reputation;
            a.sessions = r->sessions_observed;
            a.agreements = r->agreement_count;
            a.messages_sent = r->messages_sent;
            a.violations = r->compliance_violations;
        }
        a.behavior = classify_behavior(a.behavior_norm);
        report.agents.push_back(a);
    }
    return report;
}

}  // namespace

SimulationResult run_simulation(const Scenario& sc, std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = seed_override.value_or(sc.seed);
    std::mt19937_64 rng(seed);

    std::map<AgentId, AgentState> agents;
    std::vector<AgentId> ids;
    AdvertisementRepository repo;
    for (const auto& spec : sc.agents) {
        // Only agents that declare jitter consume randomness.
        const double jitter =
            spec.opening_jitter > 0.0 ? (2.0 * unit_draw(rng) - 1.0) * spec.opening_jitter : 0.0;
        agents.emplace(spec.id, make_agent_state(spec, jitter));
        ids.push_back(spec.id);
        repo.register_agent(spec.id);
    }
    for (const auto& ad : sc.advertisements) repo.submit_advertisement(ad);
    for (const auto& rfq : sc.rfqs) repo.submit_rfq(rfq);

    SimulationResult result;
    NegotiationEngine& engine = result.engine;
    TrustArchive trust = recompute_trust(engine, ids);
    MatchOptions options{sc.require_overlap, std::nullopt};

    std::vector<NegotiationMessage> pending;
    Tick tick = 0;
    bool halted = false;
    for (; tick <= sc.t_end; ++tick) {
        std::vector<NegotiationMessage> deliver = std::exchange(pending, {});
        const std::size_t closures_before = engine.closures();

        // Matchmaking and commencement.
        options.now = tick;
        for (const Match& match : match_alliances(repo, trust, options)) {
            repo.mark_matched(match.rfq_id, match.ad_id);
            try {
                auto commenced = engine.commence_negotiation(match, repo, tick);
                deliver.insert(deliver.end(), commenced.messages.begin(), commenced.messages.end());
            } catch (const Error& e) {
                if (e.code() != Errc::AlreadyAgreed) throw;
            }
        }

        // Delivery and agent steps, in agent id order.
        std::map<AgentId, std::vector<NegotiationMessage>> inboxes;
        for (auto& m : deliver) inboxes[m.receiver].push_back(std::move(m));
        std::vector<NegotiationMessage> outgoing;
        for (const AgentId& id : ids) {
            auto& inbox = inboxes[id];
            std::sort(inbox.begin(), inbox.end(), canonical_less);
            StepResult step = agent_step(std::move(agents.at(id)), inbox, tick);
            agents.at(id) = std::move(step.state);
            outgoing.insert(outgoing.end(), step.outbox.begin(), step.outbox.end());
        }

        // Routing; messages on sessions closed earlier in the tick are dropped.
        for (const auto& m : routing_order(std::move(outgoing), agents, engine)) {
            const SessionState* s = engine.find(m.session);
            if (s == nullptr || !s->open()) continue;
            if (engine.route_message(m) != DeliveryResult::Superseded) pending.push_back(m);
        }
        engine.expire(tick);
        for (auto& n : engine.drain_notices()) pending.push_back(std::move(n));

        if (engine.closures() != closures_before) trust = recompute_trust(engine, ids);

        if (!engine.any_open() && pending.empty() &&
            !can_still_match(repo, trust, options, engine, tick)) {
            halted = true;
            break;
        }
    }
    const Tick last = halted ? tick : sc.t_end;
    if (!halted) {
        const std::size_t before = engine.closures();
        engine.close_all("simulation-end", last);
        engine.drain_notices();
        if (engine.closures() != before) trust = recompute_trust(engine, ids);
    }

    for (const auto& [id, s] : engine.sessions()) {
        result.transcript.insert(result.transcript.end(), s.transcript.begin(), s.transcript.end());
    }
    std::stable_sort(result.transcript.begin(), result.transcript.end(),
                     [](const NegotiationMessage& a, const NegotiationMessage& b) {
                         return std::tie(a.sent_at, a.session) < std::tie(b.sent_at, b.session);
                     });
    result.report = build_report(sc, engine, trust, last + 1, seed);
    result.trust = std::move(trust);
    for (auto& [id, state] : agents) result.agents.push_back(std::move(state));
    return result;
}

std::string emit_report(const SimulationReport& report) {
    std::size_t agreed = 0;
    std::size_t terminated = 0;
    for (const auto& s : report.sessions) {
        if (s.outcome == "agreed") ++agreed;
        else if (s.outcome == "terminated") ++terminated;
    }

    std::string out;
    out += "Negotiation report\n";
    out += fmt::format("seed: {}  ticks: {}  sessions: {}  agreed: {}  terminated: {}\n\n",
                       report.seed, report.ticks, report.sessions.size(), agreed, terminated);
    out += fmt::format("{:<10} {:<14} {:<12} {:<12} {:<10} {:>6} {:>6} {:>8} {:>8}  {}\n",
                       "SESSION", "PRODUCT", "BUYER", "SELLER", "OUTCOME", "ROUNDS", "CLOSED",
                       "U_BUYER", "U_SELLER", "REASON");
    for (const auto& s : report.sessions) {
        out += fmt::format("{:<10} {:<14} {:<12} {:<12} {:<10} {:>6} {:>6} {:>8.4f} {:>8.4f}  {}\n",
                           s.session.str(), s.product.str(), s.buyer.str(), s.seller.str(),
                           s.outcome, s.rounds, s.closed_at, s.buyer_utility, s.seller_utility,
                           s.reason);
    }
    out += "\n";
    out += fmt::format("{:<12} {:<6} {:>8} {:<10} {:>6} {:>8} {:>6} {:>6} {:>10}\n", "AGENT",
                       "ROLE", "B", "BEHAVIOR", "R", "SESSIONS", "AGREED", "SENT", "VIOLATIONS");
    for (const auto& a : report.agents) {
        out += fmt::format("{:<12} {:<6} {:>8.4f} {:<10} {:>6.4f} {:>8} {:>6} {:>6} {:>10}\n",
                           a.agent.str(), to_string(a.role), a.behavior_norm, to_string(a.behavior),
                           a.reputation, a.sessions, a.agreements, a.messages_sent, a.violations);
    }

    out += "\n--- records ---\n";
    nlohmann::ordered_json summary;
    summary["type"] = "summary";
    summary["seed"] = report.seed;
    summary["ticks"] = report.ticks;
    summary["sessions"] = report.sessions.size();
    summary["agreed"] = agreed;
    summary["terminated"] = terminated;
    out += summary.dump() + "\n";
    for (const auto& s : report.sessions) {
        nlohmann::ordered_json j;
        j["type"] = "session";
        j["session"] = s.session.str();
        j["product"] = s.product.str();
        j["buyer"] = s.buyer.str();
        j["seller"] = s.seller.str();
        j["outcome"] = s.outcome;
        j["reason"] = s.reason;
        j["commenced_at"] = s.commenced_at;
        j["closed_at"] = s.closed_at;
        j["rounds"] = s.rounds;
        j["buyer_utility"] = s.buyer_utility;
        j["seller_utility"] = s.seller_utility;
        nlohmann::ordered_json values = nlohmann::ordered_json::object();
        for (const auto& [issue, v] : s.agreement.values) values[issue] = v;
        j["agreement"] = values;
        out += j.dump() + "\n";
    }
    for (const auto& a : report.agents) {
        nlohmann::ordered_json j;
        j["type"] = "agent";
        j["agent"] = a.agent.str();
        j["role"] = to_string(a.role);
        j["B"] = a.behavior_norm;
        j["behavior"] = to_string(a.behavior);
        j["R"] = a.reputation;
        j["sessions"] = a.sessions;
        j["agreements"] = a.agreements;
        j["messages_sent"] = a.messages_sent;
        j["violations"] = a.violations;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace cloudneg
