// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed at the top of each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cloudneg/agent.hpp"
#include "cloudneg/cli.hpp"
#include "cloudneg/marketplace.hpp"
#include "cloudneg/scenario.hpp"
#include "cloudneg/simulation.hpp"
#include "cloudneg/transcript_io.hpp"
#include "cloudneg/utility_tactics.hpp"
#include "support/gen.hpp"
#include "support/oracle.hpp"

using namespace cloudneg;

namespace {

const std::filesystem::path kScenarios = CLOUDNEG_SCENARIO_DIR;

/// Collects the first few failure details of one criterion.
class Check {
public:
    void expect(bool ok, const std::string& detail) {
        if (ok) return;
        ++failures_;
        if (details_.size() < 3) details_.push_back(detail);
    }
    bool ok() const { return failures_ == 0; }
    std::string summary() const {
        std::string s = fmt::format("{} failure(s)", failures_);
        for (const auto& d : details_) s += "; " + d;
        return s;
    }

private:
    int failures_ = 0;
    std::vector<std::string> details_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool close_to(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// 1. Time function constraints.
void criterion_time_function(Check& c) {
    const auto start = std::chrono::steady_clock::now();
    gen::Rng rng(1);
    const Tick t_max = 100;
    for (double beta : {0.05, 0.2, 1.0, 5.0, 20.0}) {
        for (double k : {0.0, 0.3, 0.9}) {
            const TacticParams p{k, beta, Stance::Linear};
            c.expect(time_function(0.0, t_max, p) == k, fmt::format("f(0) != k for beta={} k={}", beta, k));
            c.expect(close_to(time_function(static_cast<double>(t_max), t_max, p), 1.0, 1e-12),
                     fmt::format("f(t_max) != 1 for beta={} k={}", beta, k));
            std::vector<double> ts(1000);
            for (auto& t : ts) t = rng.uniform(0.0, static_cast<double>(t_max));
            std::sort(ts.begin(), ts.end());
            double prev = time_function(0.0, t_max, p);
            for (double t : ts) {
                const double f = time_function(t, t_max, p);
                c.expect(f >= 0.0 && f <= 1.0, fmt::format("f({})={} outside [0,1]", t, f));
                c.expect(f >= prev, fmt::format("f decreases at t={} beta={} k={}", t, beta, k));
                prev = f;
            }
        }
    }
    const double elapsed = seconds_since(start);
    c.expect(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));
}

// 2. Concession rate against direct arithmetic.
void criterion_concession_rate(Check& c) {
    gen::Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const double a = rng.uniform(-1000, 1000);
        const double sign = rng.coin() ? 1.0 : -1.0;
        const double b = a + sign * rng.uniform(1e-3, 100);
        const double d = b + sign * rng.uniform(1e-3, 100);
        const auto got = concession_rate(a, b, d);
        const double want = oracle::lambda(a, b, d);
        c.expect(got.has_value() && close_to(*got, want, 1e-12),
                 fmt::format("triple ({}, {}, {})", a, b, d));
    }
    // Progressions with exactly representable terms.
    for (int i = 0; i < 10000; ++i) {
        const double a = static_cast<double>(rng.integer(-100000, 100000)) / 8.0;
        std::int64_t step = rng.integer(-4000, 4000);
        if (step == 0) step = 1;
        const double d = static_cast<double>(step) / 16.0;
        const auto got = concession_rate(a, a + d, a + 2 * d);
        c.expect(got.has_value() && *got == 1.0, fmt::format("progression {} step {}", a, d));
    }
}

// 3. Aggregate utility against per-issue recomputation.
void criterion_utility(Check& c) {
    gen::Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const Agenda raw = gen::agenda(rng, static_cast<std::size_t>(rng.integer(1, 8)));
        const ValidatedAgenda agenda = validate_agenda(raw);
        std::vector<oracle::Issue> issues;
        for (const auto& s : raw.issues) issues.push_back({s.issue_id, s.weight, s.min_value, s.max_value});
        const OfferPackage pkg = gen::package_in(rng, raw);
        const double ub = aggregate_utility(agenda, pkg, Perspective::Buyer);
        const double us = aggregate_utility(agenda, pkg, Perspective::Seller);
        c.expect(close_to(ub, oracle::utility(issues, pkg.values, true), 1e-12),
                 fmt::format("buyer utility trial {}", trial));
        c.expect(close_to(us, oracle::utility(issues, pkg.values, false), 1e-12),
                 fmt::format("seller utility trial {}", trial));
        c.expect(close_to(ub + us, 1.0, 1e-9), fmt::format("complement trial {}", trial));
    }
}

std::string bilateral_doc(double s_lo, double s_hi, bool overlap) {
    return fmt::format(R"(t_end: 40
matchmaking: {{require_overlap: {}}}
agents:
  - id: buyer
    role: buyer
    tactic: {{stance: conceder, k: 0.0, beta: 5.0}}
    agendas:
      - product: vm
        t_max: 20
        issues: [{{id: price, weight: 1.0, min: 10, max: 20}}]
  - id: seller
    role: seller
    tactic: {{stance: conceder, k: 0.0, beta: 5.0}}
    agendas:
      - product: vm
        t_max: 20
        issues: [{{id: price, weight: 1.0, min: {}, max: {}}}]
advertisements: [{{agent: seller, product: vm}}]
rfqs: [{{agent: buyer, product: vm}}]
)",
                       overlap, s_lo, s_hi);
}

// 4. Protocol: agreement before the deadline, termination exactly after it.
void criterion_protocol(Check& c) {
    {
        const auto start = std::chrono::steady_clock::now();
        const auto r = run_simulation(load_scenario(bilateral_doc(10, 20, true)));
        const double elapsed = seconds_since(start);
        c.expect(r.report.sessions.size() == 1, "agreeing scenario: expected one session");
        if (r.report.sessions.size() == 1) {
            const auto& s = r.report.sessions[0];
            c.expect(s.outcome == "agreed", "agreeing scenario: outcome " + s.outcome);
            c.expect(s.closed_at < 20, fmt::format("agreed at tick {}", s.closed_at));
            if (s.outcome == "agreed") {
                const double v = s.agreement.values.at("price");
                c.expect(v >= 10 && v <= 20, fmt::format("agreed price {}", v));
            }
        }
        c.expect(elapsed < 1.0, fmt::format("agreeing scenario took {:.3f} s", elapsed));
    }
    {
        const auto start = std::chrono::steady_clock::now();
        const auto r = run_simulation(load_scenario(bilateral_doc(30, 40, false)));
        const double elapsed = seconds_since(start);
        c.expect(r.report.sessions.size() == 1, "disjoint scenario: expected one session");
        const SessionState* s = r.engine.find(SessionId("s-0001"));
        if (s != nullptr) {
            c.expect(std::holds_alternative<OutcomeTerminated>(s->outcome), "disjoint: not terminated");
            const Tick deadline = s->deadline();
            const auto first_late =
                std::find_if(s->transcript.begin(), s->transcript.end(),
                             [&](const NegotiationMessage& m) { return m.sent_at > deadline; });
            c.expect(first_late != s->transcript.end(), "disjoint: no message after the deadline");
            if (first_late != s->transcript.end()) {
                c.expect(first_late->kind() == MessageKind::Terminate,
                         "disjoint: first late message is not a termination");
                c.expect(first_late + 1 == s->transcript.end(), "disjoint: traffic after termination");
            }
            for (auto it = s->transcript.begin(); it != first_late; ++it) {
                c.expect(it->kind() != MessageKind::Terminate && it->kind() != MessageKind::Acquire,
                         fmt::format("disjoint: closed early at tick {}", it->sent_at));
            }
        }
        c.expect(elapsed < 1.0, fmt::format("disjoint scenario took {:.3f} s", elapsed));
    }
}

AgentState scripted_buyer(Tick t_max) {
    AgentState s;
    s.id = AgentId("agent");
    s.role = Perspective::Buyer;
    s.tactic = {0.0, 1.0, Stance::Linear};
    s.agendas.emplace(ProductId("vm"),
                      validate_agenda({{{"price", 1.0, 10, 100, Direction::Ascending}}, t_max, 0}));
    return s;
}

NegotiationMessage commence_for(const AgentState& s, Tick t_max, Range space) {
    CommencePayload info{ProductId("vm"), s.id, AgentId("opponent"), {{"price", space}}, t_max};
    return {SessionId("s-0001"), AgentId(std::string(kMarketplaceId)), s.id, 0, 0, Commence{info}};
}

/// Feeds the opponent trail to a fresh buyer, one offer every other tick,
/// and reports the tactic after each opponent offer.
std::vector<TacticParams> tactic_trace(const std::vector<double>& trail) {
    const Tick t_max = 40;
    AgentState state = scripted_buyer(t_max);
    const auto commence = commence_for(state, t_max, {10, 100});
    state = agent_step(std::move(state), std::vector{commence}, 0).state;
    std::vector<TacticParams> trace;
    for (std::size_t i = 0; i < trail.size(); ++i) {
        const Tick sent = static_cast<Tick>(2 * i);
        NegotiationMessage offer{SessionId("s-0001"), AgentId("opponent"), state.id,
                                 static_cast<std::int64_t>(2 * i + 1), sent,
                                 Offer{{{{"price", trail[i]}}}}};
        auto r = agent_step(std::move(state), std::vector{offer}, sent + 1);
        trace.push_back(r.state.tactic);
        state = std::move(r.state);
    }
    return trace;
}

// 5. Tactic adaptation to scripted opponents.
void criterion_adaptation(Check& c) {
    const TacticParams initial{0.0, 1.0, Stance::Linear};

    const auto headstrong = tactic_trace({100, 90, 85, 82.5, 81.25, 80.625});
    for (std::size_t i = 0; i < 2; ++i) {
        c.expect(headstrong[i] == initial, fmt::format("headstrong: changed before round 3 ({})", i + 1));
    }
    for (std::size_t i = 2; i < headstrong.size(); ++i) {
        c.expect(headstrong[i].stance == Stance::Conceder,
                 fmt::format("headstrong: round {} stance {}", i + 1, to_string(headstrong[i].stance)));
    }

    const auto conceder = tactic_trace({100, 99, 97, 93, 85, 69});
    for (std::size_t i = 2; i < conceder.size(); ++i) {
        c.expect(conceder[i].stance == Stance::Conceder && close_to(conceder[i].beta, 2.0, 1e-9),
                 fmt::format("conceder: round {} beta {}", i + 1, conceder[i].beta));
    }

    std::vector<double> linear_trail;
    for (int i = 0; i < 10; ++i) linear_trail.push_back(100.0 - 2.0 * i);
    const auto linear = tactic_trace(linear_trail);
    c.expect(linear.size() == 10, "linear: trace too short");
    for (std::size_t i = 0; i < linear.size(); ++i) {
        c.expect(linear[i] == initial, fmt::format("linear: changed at round {}", i + 1));
    }
}

// 6. Resource-driven deadline and full concession at it.
void criterion_hybrid_deadline(Check& c) {
    const ResourceProjection projection{ResourceSchedule({{0, 1.0}, {10, 0.0}}), 0.2};
    const Tick t_max = 20;
    const Tick t_eff = effective_deadline(t_max, projection);
    c.expect(t_eff == 8, fmt::format("effective deadline {}", t_eff));

    AgentState seller;
    seller.id = AgentId("seller");
    seller.role = Perspective::Seller;
    seller.tactic = {0.0, 1.0, Stance::Linear};
    seller.resources = projection;
    const IssueSpec price{"price", 1.0, 10, 20, Direction::Descending};
    seller.agendas.emplace(ProductId("vm"), validate_agenda({{price}, t_max, 0}));
    CommencePayload info{ProductId("vm"), AgentId("buyer"), seller.id, {{"price", {5, 20}}}, t_max};
    NegotiationMessage commence{SessionId("s-0001"), AgentId(std::string(kMarketplaceId)), seller.id,
                                0, 0, Commence{info}};

    auto r = agent_step(std::move(seller), std::vector{commence}, 0);
    const SessionEntry* entry = r.state.agenda_db.find(SessionId("s-0001"));
    c.expect(entry != nullptr && entry->t_max_eff == 8, "session effective deadline is not 8");
    AgentState state = std::move(r.state);
    std::optional<double> at_eight;
    for (Tick t = 1; t <= 8; ++t) {
        std::vector<NegotiationMessage> inbox;
        if (t % 2 == 1) {
            inbox.push_back({SessionId("s-0001"), AgentId("buyer"), state.id, static_cast<std::int64_t>(t + 1),
                             t, Offer{{{{"price", 5.0 + 0.1 * static_cast<double>(t)}}}}});
        }
        auto step = agent_step(std::move(state), inbox, t == 8 ? 8 : t + (t % 2));
        for (const auto& m : step.outbox) {
            if (m.sent_at == 8 && m.kind() == MessageKind::Offer) at_eight = m.package()->values.at("price");
        }
        state = std::move(step.state);
        if (t % 2 == 1) ++t;
    }
    // Descending issue, f = 1: min + (1 - 1) * span.
    const double want = price.min_value + (1.0 - oracle::time_fn(8, 8, 0.0, 1.0)) *
                                              (price.max_value - price.min_value);
    c.expect(at_eight.has_value(), "no offer sent at tick 8");
    if (at_eight) c.expect(close_to(*at_eight, want, 1e-9), fmt::format("offer at 8 = {}", *at_eight));
}

// 7. Matchmaking against brute-force enumeration.
void criterion_matchmaking(Check& c) {
    gen::Rng rng(7);
    const std::vector<std::string> issue_names{"price", "ram", "cpu"};
    const std::vector<std::string> products{"vm", "gpu"};
    for (int trial = 0; trial < 100; ++trial) {
        AdvertisementRepository repo;
        TrustArchive trust;
        std::vector<AgentId> agents;
        const auto n_agents = rng.integer(2, 10);
        for (int i = 0; i < n_agents; ++i) {
            agents.emplace_back(fmt::format("a{}", i));
            repo.register_agent(agents.back());
            if (rng.coin()) trust.put({agents.back(), 1.0, rng.uniform(0, 1)});
        }
        auto random_issues = [&] {
            std::vector<IssueRange> out;
            for (const auto& name : issue_names) {
                if (!out.empty() && rng.coin()) continue;
                const double lo = rng.uniform(0, 50);
                out.push_back({name, {lo, lo + rng.uniform(1, 30)}});
            }
            return out;
        };
        auto role = [&] { return rng.coin() ? Perspective::Buyer : Perspective::Seller; };
        const auto n_posts = rng.integer(1, 10);
        for (int i = 0; i < n_posts; ++i) {
            const AgentId who = agents[static_cast<std::size_t>(rng.integer(0, n_agents - 1))];
            const ProductId product(products[static_cast<std::size_t>(rng.integer(0, 1))]);
            if (rng.coin()) {
                repo.submit_advertisement({"", who, product, role(), random_issues(), 20, rng.integer(0, 5)});
            } else {
                repo.submit_rfq({"", who, product, role(), random_issues(), rng.uniform(0, 1), 20,
                                 rng.integer(0, 5)});
            }
        }
        for (const auto& q : repo.rfqs())
            for (const auto& a : repo.advertisements())
                if (rng.integer(0, 5) == 0) repo.mark_matched(q.rfq_id, a.ad_id);

        const bool require_overlap = rng.coin();
        const std::optional<Tick> now = rng.coin() ? std::optional<Tick>(rng.integer(0, 5)) : std::nullopt;
        std::set<std::pair<std::string, std::string>> got;
        for (const auto& m : match_alliances(repo, trust, {require_overlap, now})) got.insert({m.rfq_id, m.ad_id});

        std::set<std::pair<std::string, std::string>> want;
        for (const auto& q : repo.rfqs()) {
            for (const auto& a : repo.advertisements()) {
                if (repo.is_matched(q.rfq_id, a.ad_id)) continue;
                if (now && (q.posted_at > *now || a.posted_at > *now)) continue;
                const bool same_product = q.product == a.product;
                const bool opposite = q.role != a.role;
                bool covered = true;
                bool overlapping = true;
                for (const auto& qi : q.issues) {
                    auto it = std::find_if(a.issues.begin(), a.issues.end(),
                                           [&](const IssueRange& ai) { return ai.issue_id == qi.issue_id; });
                    if (it == a.issues.end()) {
                        covered = false;
                        continue;
                    }
                    if (qi.range.max < it->range.min || it->range.max < qi.range.min) overlapping = false;
                }
                const TrustRecord* rec = trust.find(a.agent);
                const double rep = rec ? rec->reputation : 0.5;
                if (same_product && opposite && covered && (overlapping || !require_overlap) &&
                    rep >= q.min_reputation) {
                    want.insert({q.rfq_id, a.ad_id});
                }
            }
        }
        c.expect(got == want, fmt::format("trial {}: {} matches vs {} expected", trial, got.size(), want.size()));
    }
}

Transcript scripted_session(NegotiationEngine& engine, AdvertisementRepository& repo, const AgentId& agent,
                            const std::vector<double>& trail) {
    const Match m = match_alliances(repo, {}).back();
    repo.mark_matched(m.rfq_id, m.ad_id);
    const auto commenced = engine.commence_negotiation(m, repo, 0);
    const AgentId peer("peer");
    std::int64_t round = 1;
    Tick t = 0;
    for (double v : trail) {
        engine.route_message({commenced.session, agent, peer, round++, t++, Offer{{{{"price", v}}}}});
        engine.route_message({commenced.session, peer, agent, round++, t++, Offer{{{{"price", 1.0}}}}});
    }
    engine.route_message({commenced.session, peer, agent, round, t, Terminate{"plan"}});
    return engine.find(commenced.session)->transcript;
}

// 8. Watchdog bounds after runs and scripted behavior probes.
void criterion_watchdog(Check& c) {
    std::vector<SimulationResult> runs;
    runs.push_back(run_simulation(load_scenario_file(kScenarios / "market.yaml")));
    runs.push_back(run_simulation(load_scenario_file(kScenarios / "concurrent.yaml")));
    gen::Rng rng(8);
    for (int i = 0; i < 10; ++i) runs.push_back(run_simulation(load_scenario(gen::market_yaml(rng, 4, 4, 3))));
    for (const auto& r : runs) {
        for (const auto& [id, rec] : r.trust.records()) {
            c.expect(rec.reputation >= 0.0 && rec.reputation <= 1.0,
                     fmt::format("{} R={}", id.str(), rec.reputation));
            c.expect(rec.behavior_norm >= 0.0, fmt::format("{} B={}", id.str(), rec.behavior_norm));
        }
    }

    struct Probe {
        double lambda;
        std::vector<double> trail;
        Stance stance;
    };
    const std::vector<Probe> probes{{0.5, {100, 84, 76, 72, 70}, Stance::Headstrong},
                                    {1.0, {100, 96, 92, 88, 84}, Stance::Linear},
                                    {2.0, {100, 99, 97, 93, 85}, Stance::Conceder}};
    for (const auto& p : probes) {
        const AgentId agent("probe");
        AdvertisementRepository repo;
        repo.register_agent(agent);
        repo.register_agent(AgentId("peer"));
        repo.submit_advertisement({"", agent, ProductId("vm"), Perspective::Seller, {{"price", {0, 200}}}, 50, 0});
        repo.submit_rfq({"", AgentId("peer"), ProductId("vm"), Perspective::Buyer, {{"price", {0, 200}}}, 0, 50, 0});
        NegotiationEngine engine;
        scripted_session(engine, repo, agent, p.trail);
        const TrustArchive archive = recompute_trust(engine, {agent, AgentId("peer")});
        const double b = archive.find(agent)->behavior_norm;
        c.expect(close_to(b, p.lambda, 1e-9), fmt::format("probe {}: B={}", p.lambda, b));
        c.expect(classify_behavior(b) == p.stance,
                 fmt::format("probe {}: classified {}", p.lambda, to_string(classify_behavior(b))));
    }
}

/// Buyer's own valuation of a single-issue price, saturating outside its range.
double buyer_value(const oracle::Issue& range, double price) {
    return std::clamp(oracle::score(range, price, true), 0.0, 1.0);
}

// 9. Concurrent sessions resolve to the best standing offer.
void check_concurrent_run(Check& c, const Scenario& sc, const std::string& label) {
    const auto r = run_simulation(sc);
    const AgentSpec* buyer = sc.find_agent(AgentId("buyer"));
    const IssueSpec& spec = buyer->agendas.begin()->second.issues().at(0);
    const oracle::Issue range{"price", 1.0, spec.min_value, spec.max_value};

    const SessionState* winner = nullptr;
    int agreed = 0;
    for (const auto& [id, s] : r.engine.sessions()) {
        if (std::holds_alternative<OutcomeAgreed>(s.outcome)) {
            ++agreed;
            winner = &s;
        } else {
            c.expect(std::holds_alternative<OutcomeTerminated>(s.outcome), label + ": session left open");
        }
    }
    c.expect(agreed == 1, fmt::format("{}: {} agreed sessions", label, agreed));
    if (winner == nullptr) return;
    const auto& deal = std::get<OutcomeAgreed>(winner->outcome);
    const double won = buyer_value(range, deal.package.values.at("price"));
    for (const auto& [id, s] : r.engine.sessions()) {
        if (&s == winner) continue;
        const NegotiationMessage* standing = nullptr;
        for (const auto& m : s.transcript) {
            if (m.sender == s.seller && m.kind() == MessageKind::Offer && m.sent_at < deal.at) standing = &m;
        }
        if (standing == nullptr) continue;
        const double other = buyer_value(range, standing->package()->values.at("price"));
        c.expect(won >= other - 1e-12,
                 fmt::format("{}: agreed utility {} below {} in {}", label, won, other, id.str()));
    }
}

void criterion_concurrent(Check& c) {
    check_concurrent_run(c, load_scenario_file(kScenarios / "concurrent.yaml"), "concurrent.yaml");
    gen::Rng rng(9);
    const char* stances[] = {"headstrong", "linear", "conceder"};
    for (int trial = 0; trial < 30; ++trial) {
        std::string doc = R"(t_end: 60
agents:
  - id: buyer
    role: buyer
    tactic: {stance: linear}
    agendas:
      - product: vm
        t_max: 20
        issues: [{id: price, weight: 1.0, min: 10, max: 30}]
)";
        std::string ads = "advertisements:\n";
        for (int i = 0; i < 3; ++i) {
            const double lo = rng.uniform(5, 20) + i;
            doc += fmt::format(R"(  - id: seller-{}
    role: seller
    tactic: {{stance: {}, k: {:.3f}}}
    agendas:
      - product: vm
        t_max: {}
        issues: [{{id: price, weight: 1.0, min: {:.3f}, max: {:.3f}}}]
)",
                               i, stances[rng.integer(0, 2)], rng.uniform(0, 0.3), rng.integer(10, 30),
                               lo, lo + rng.uniform(5, 20));
            ads += fmt::format("  - {{agent: seller-{}, product: vm}}\n", i);
        }
        doc += ads + "rfqs:\n  - {agent: buyer, product: vm}\n";
        const auto sc = load_scenario(doc);
        const auto r = run_simulation(sc);
        // Only scenarios where some deal is reachable say anything about resolution.
        const bool any_agreed = std::any_of(r.report.sessions.begin(), r.report.sessions.end(),
                                            [](const SessionSummary& s) { return s.outcome == "agreed"; });
        if (any_agreed) check_concurrent_run(c, sc, fmt::format("trial {}", trial));
    }
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

// 10. Replay determinism and the full-market time budget.
void criterion_determinism(Check& c) {
    const auto base = std::filesystem::temp_directory_path() / "cloudneg-acceptance";
    std::filesystem::remove_all(base);
    for (const char* name : {"bilateral.yaml", "disjoint.yaml", "concurrent.yaml", "market.yaml"}) {
        std::vector<std::string> outputs;
        for (int run = 0; run < 2; ++run) {
            const auto dir = base / fmt::format("{}-{}", name, run);
            std::ostringstream out;
            std::ostringstream err;
            const auto start = std::chrono::steady_clock::now();
            const int code = run_cli({"run", "--scenario", (kScenarios / name).string(), "--seed", "42",
                                      "--out", dir.string()},
                                     out, err);
            const double elapsed = seconds_since(start);
            c.expect(code == 0, fmt::format("{} exited {}: {}", name, code, err.str()));
            if (std::string(name) == "market.yaml") {
                c.expect(elapsed < 5.0, fmt::format("market run took {:.3f} s", elapsed));
            }
            outputs.push_back(slurp(dir / "transcript.jsonl") + "\x1e" + slurp(dir / "report.txt"));
        }
        c.expect(outputs[0] == outputs[1], fmt::format("{} output differs between runs", name));
        c.expect(outputs[0].size() > 1, fmt::format("{} produced no output", name));
    }
    const auto market = load_scenario_file(kScenarios / "market.yaml");
    std::set<std::string> products;
    for (const auto& a : market.agents)
        for (const auto& [p, agenda] : a.agendas) products.insert(p.str());
    c.expect(market.agents.size() == 10 && products.size() == 5, "market scenario is not 10 agents x 5 products");
    std::filesystem::remove_all(base);
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Check&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "time function constraint sweep", criterion_time_function},
        {2, "concession rate oracle", criterion_concession_rate},
        {3, "aggregate utility oracle", criterion_utility},
        {4, "protocol agreement and deadline termination", criterion_protocol},
        {5, "tactic adaptation to scripted opponents", criterion_adaptation},
        {6, "resource-driven effective deadline", criterion_hybrid_deadline},
        {7, "matchmaking brute-force oracle", criterion_matchmaking},
        {8, "watchdog bounds and behavior probes", criterion_watchdog},
        {9, "concurrent session resolution", criterion_concurrent},
        {10, "replay determinism and market runtime", criterion_determinism},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            cr.run(check);
        } catch (const std::exception& e) {
            check.expect(false, fmt::format("exception: {}", e.what()));
        }
        const double elapsed = seconds_since(start);
        if (check.ok()) {
            std::cout << fmt::format("PASS [{:>2}] {} ({:.3f} s)\n", cr.id, cr.name, elapsed);
        } else {
            ++failed;
            std::cout << fmt::format("FAIL [{:>2}] {} ({:.3f} s): {}\n", cr.id, cr.name, elapsed,
                                     check.summary());
        }
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
