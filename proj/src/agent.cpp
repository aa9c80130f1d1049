#include "cloudneg/agent.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace cloudneg {

std::string_view to_string(GoalStatus s) {
    switch (s) {
        case GoalStatus::Active: return "active";
        case GoalStatus::Achieved: return "achieved";
        case GoalStatus::Abandoned: return "abandoned";
    }
    return "?";
}

void GoalRepository::open(const SessionId& session, double target_utility) {
    goals_[session] = Goal{target_utility, GoalStatus::Active};
}

void GoalRepository::close(const SessionId& session, GoalStatus status) {
    auto it = goals_.find(session);
    if (it == goals_.end() || it->second.status != GoalStatus::Active) return;
    it->second.status = status;
}

GoalStatus GoalRepository::status(const SessionId& session) const {
    const Goal* g = find(session);
    return g == nullptr ? GoalStatus::Abandoned : g->status;
}

const Goal* GoalRepository::find(const SessionId& session) const {
    auto it = goals_.find(session);
    return it == goals_.end() ? nullptr : &it->second;
}

namespace {

constexpr std::pair<PlanKind, std::string_view> kPlanNames[] = {
    {PlanKind::Idle, "idle"},
    {PlanKind::MakeOffer, "make-offer"},
    {PlanKind::MakeCounter, "make-counter"},
    {PlanKind::Accept, "accept"},
    {PlanKind::Terminate, "terminate"},
};

constexpr std::pair<Trigger, std::string_view> kTriggerNames[] = {
    {Trigger::GoalClosed, "goal-closed"},
    {Trigger::DeadlinePassed, "deadline-passed"},
    {Trigger::AwaitingOpening, "awaiting-opening"},
    {Trigger::OfferMeetsGoal, "offer-meets-goal"},
    {Trigger::ResourcesLow, "resources-low"},
    {Trigger::Always, "always"},
};

}  // namespace

std::string_view to_string(PlanKind k) {
    for (const auto& [kind, name] : kPlanNames)
        if (kind == k) return name;
    return "?";
}

std::string_view to_string(Trigger t) {
    for (const auto& [trig, name] : kTriggerNames)
        if (trig == t) return name;
    return "?";
}

std::optional<PlanKind> plan_kind_from_string(std::string_view s) {
    for (const auto& [kind, name] : kPlanNames)
        if (name == s) return kind;
    return std::nullopt;
}

std::optional<Trigger> trigger_from_string(std::string_view s) {
    for (const auto& [trig, name] : kTriggerNames)
        if (name == s) return trig;
    return std::nullopt;
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::UnknownSession: return "unknown-session";
        case RejectReason::DeadlineExceeded: return "deadline-exceeded";
        case RejectReason::OutOfSpace: return "out-of-space";
        case RejectReason::StaleRound: return "stale-round";
    }
    return "?";
}

PlanLibrary::PlanLibrary(std::vector<PlanRule> rules) : rules_(std::move(rules)) {
    if (rules_.empty()) {
        throw Error(Errc::ValidationError, "plan library must not be empty");
    }
    if (rules_.back().when != Trigger::Always) {
        throw Error(Errc::ValidationError, "last plan rule must be the 'always' catch-all");
    }
}

std::vector<PlanRule> PlanLibrary::default_rules() {
    return {
        {Trigger::GoalClosed, PlanKind::Idle},
        {Trigger::DeadlinePassed, PlanKind::Terminate},
        {Trigger::AwaitingOpening, PlanKind::MakeOffer},
        {Trigger::Always, PlanKind::MakeCounter},
    };
}

const SessionEntry* AgendaDB::find(const SessionId& s) const {
    auto it = sessions_.find(s);
    return it == sessions_.end() ? nullptr : &it->second;
}

SessionEntry* AgendaDB::find(const SessionId& s) {
    auto it = sessions_.find(s);
    return it == sessions_.end() ? nullptr : &it->second;
}

void AgendaDB::insert(const SessionId& s, SessionEntry entry) {
    if (!sessions_.emplace(s, std::move(entry)).second) {
        throw Error(Errc::DuplicateId, fmt::format("session '{}' already active", s.str()));
    }
}

FilterVerdict proxy_filter(const NegotiationMessage& msg, const AgendaDB& db, Tick now) {
    (void)now;
    const SessionEntry* entry = db.find(msg.session);
    if (entry == nullptr) return RejectReason::UnknownSession;
    if (msg.sent_at > entry->t_max_eff) return RejectReason::DeadlineExceeded;
    if (const OfferPackage* pkg = msg.package(); pkg != nullptr) {
        if (pkg->values.size() != entry->space.size()) return RejectReason::OutOfSpace;
        for (const auto& [issue, value] : pkg->values) {
            auto it = entry->space.find(issue);
            if (it == entry->space.end() || !(value >= it->second.min && value <= it->second.max)) {
                return RejectReason::OutOfSpace;
            }
        }
    }
    if (msg.round <= entry->last_opponent_round) return RejectReason::StaleRound;
    return std::nullopt;
}

Beliefset update_beliefs(Beliefset beliefs, const NegotiationMessage& msg, Tick now) {
    const OfferPackage* pkg = msg.package();
    if (pkg == nullptr) return beliefs;
    auto& session = beliefs.sessions[msg.session];
    session.updated_at = std::max(session.updated_at, now);
    for (const auto& [issue, value] : pkg->values) {
        auto& b = session.issues[issue];
        b.history.push_back(value);
        if (b.history.size() > kBeliefHistory) b.history.pop_front();
        if (b.history.size() == kBeliefHistory) {
            b.lambda = concession_rate(b.history[0], b.history[1], b.history[2]);
            b.stance = classify_rate(b.lambda.value_or(1.0));
        }
    }
    return beliefs;
}

std::optional<double> session_concession_rate(const Beliefset& beliefs, const SessionId& session,
                                              const ValidatedAgenda& agenda) {
    auto it = beliefs.sessions.find(session);
    if (it == beliefs.sessions.end()) return std::nullopt;
    double rate = 0.0;
    for (const auto& spec : agenda.issues()) {
        auto b = it->second.issues.find(spec.issue_id);
        if (b == it->second.issues.end() || b->second.history.size() < kBeliefHistory) {
            return std::nullopt;
        }
        rate += spec.weight * b->second.lambda.value_or(1.0);
    }
    return rate;
}

PlanKind select_plan(const PlanLibrary& plans, const GoalRepository& goals,
                     const Beliefset& beliefs, const SessionId& session,
                     const SessionEntry& entry, Tick now) {
    auto holds = [&](Trigger t) {
        switch (t) {
            case Trigger::GoalClosed:
                return goals.status(session) != GoalStatus::Active;
            case Trigger::DeadlinePassed:
                return now > entry.t_max_eff;
            case Trigger::AwaitingOpening:
                return entry.initiator && !entry.opened;
            case Trigger::OfferMeetsGoal: {
                if (!entry.standing || entry.standing_at != now) return false;
                const OfferPackage& pkg = *entry.standing->package();
                const Goal* goal = goals.find(session);
                return goal != nullptr && acceptable_package(entry.agenda, pkg, entry.role) &&
                       evaluate_package(entry.agenda, pkg, entry.role) >= goal->target_utility;
            }
            case Trigger::ResourcesLow:
                return beliefs.resources_low;
            case Trigger::Always:
                return true;
        }
        return false;
    };
    for (const auto& rule : plans.rules()) {
        if (holds(rule.when)) return rule.plan;
    }
    return PlanKind::MakeCounter;  // unreachable: the library ends with Always
}

double poll_resources(const ResourceProjection& projection, Tick now) {
    return projection.schedule.at(static_cast<double>(now));
}

namespace {

Tick session_effective_deadline(const ResourceProjection& resources, Tick commence_at,
                                Tick t_max) {
    ResourceProjection local{resources.schedule.shifted(commence_at), resources.r_threshold};
    return commence_at + effective_deadline(t_max, local);
}

}  // namespace

void open_session(AgentState& state, const NegotiationMessage& commence) {
    const auto* c = std::get_if<Commence>(&commence.body);
    if (c == nullptr) {
        throw Error(Errc::ValidationError, "open_session needs a Commence message");
    }
    const CommencePayload& info = c->info;
    auto agenda_it = state.agendas.find(info.product);
    if (agenda_it == state.agendas.end()) {
        throw Error(Errc::MissingIssue,
                    fmt::format("agent '{}' has no agenda for product '{}'", state.id.str(),
                                info.product.str()));
    }
    std::vector<std::string> shared;
    for (const auto& spec : agenda_it->second.issues()) {
        if (info.space.count(spec.issue_id)) shared.push_back(spec.issue_id);
    }
    if (shared.size() != info.space.size()) {
        throw Error(Errc::MissingIssue,
                    fmt::format("agent '{}' agenda for '{}' does not cover the shared issues",
                                state.id.str(), info.product.str()));
    }
    ValidatedAgenda agenda = restrict_agenda(agenda_it->second, shared, info.t_max);
    const bool is_seller = info.seller == state.id;
    const Tick start = commence.sent_at;

    SessionEntry entry{
        .product = info.product,
        .opponent = is_seller ? info.buyer : info.seller,
        .role = is_seller ? Perspective::Seller : Perspective::Buyer,
        .initiator = is_seller,
        .agenda = agenda,
        .space = info.space,
        .commence_at = start,
        .deadline = start + info.t_max,
        .t_max_eff = session_effective_deadline(state.resources, start, info.t_max),
    };
    const Tick local_eff = entry.t_max_eff - start;
    const OfferPackage opening = generate_offer_package(agenda, 0.0, local_eff, state.tactic);
    state.goals.open(commence.session, aggregate_utility(agenda, opening, entry.role));
    state.beliefs.sessions[commence.session].updated_at = start;
    state.agenda_db.insert(commence.session, std::move(entry));
}

Resolution resolve_concurrent_agreements(const AgendaDB& db,
                                         std::span<const Candidate> candidates) {
    if (candidates.empty()) {
        throw Error(Errc::EmptyCandidates, "no candidate agreements to resolve");
    }
    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
        if (!db.contains(c.session)) {
            throw Error(Errc::UnknownSession,
                        fmt::format("candidate session '{}' is not active", c.session.str()));
        }
        if (best == nullptr || c.utility > best->utility ||
            (c.utility == best->utility && c.session < best->session)) {
            best = &c;
        }
    }
    Resolution out{best->session, {}};
    const ProductId& product = db.find(best->session)->product;
    for (const auto& [id, entry] : db.sessions()) {
        if (id != best->session && entry.product == product) out.terminate.push_back(id);
    }
    return out;
}

namespace {

struct Decision {
    enum class Kind { None, Offer, Acquire, Terminate };
    Kind kind = Kind::None;
    OfferPackage package;
    std::string reason;
};

}  // namespace

StepResult agent_step(AgentState state, std::span<const NegotiationMessage> inbox, Tick now) {
    StepResult result;
    std::vector<NegotiationMessage>& outbox = result.outbox;
    std::vector<StepEvent>& events = result.events;

    auto make_message = [&](const SessionId& session, SessionEntry& entry, MessageBody body) {
        entry.round += 1;
        return NegotiationMessage{session, state.id, entry.opponent, entry.round, now,
                                  std::move(body)};
    };
    auto close = [&](const SessionId& session, GoalStatus status) {
        state.goals.close(session, status);
        state.agenda_db.erase(session);
    };

    for (const NegotiationMessage& msg : inbox) {
        if (msg.receiver != state.id) {
            events.push_back({StepEvent::Kind::Ignored, msg.session, msg.sender, "misaddressed"});
            continue;
        }
        switch (msg.kind()) {
            case MessageKind::Commence: {
                if (state.agenda_db.contains(msg.session)) break;
                try {
                    open_session(state, msg);
                    events.push_back({StepEvent::Kind::Opened, msg.session,
                                      state.agenda_db.find(msg.session)->opponent, ""});
                } catch (const Error& e) {
                    events.push_back({StepEvent::Kind::Rejected, msg.session, msg.sender,
                                      e.what()});
                }
                break;
            }
            case MessageKind::Offer: {
                if (auto verdict = proxy_filter(msg, state.agenda_db, now)) {
                    events.push_back({StepEvent::Kind::Rejected, msg.session, msg.sender,
                                      std::string(to_string(*verdict))});
                    if (*verdict == RejectReason::DeadlineExceeded) {
                        SessionEntry& entry = *state.agenda_db.find(msg.session);
                        entry.round = std::max(entry.round, msg.round);
                        outbox.push_back(make_message(msg.session, entry, Terminate{"deadline"}));
                        close(msg.session, GoalStatus::Abandoned);
                        events.push_back({StepEvent::Kind::Closed, msg.session, msg.sender,
                                          "deadline"});
                    }
                    break;
                }
                SessionEntry& entry = *state.agenda_db.find(msg.session);
                entry.last_opponent_round = msg.round;
                entry.round = std::max(entry.round, msg.round);
                entry.opponent_offers += 1;
                entry.standing = msg;
                entry.standing_at = now;
                state.beliefs = update_beliefs(std::move(state.beliefs), msg, now);
                if (auto lambda = session_concession_rate(state.beliefs, msg.session, entry.agenda)) {
                    state.tactic = adapt_tactic(state.tactic, *lambda, entry.opponent_offers);
                }
                break;
            }
            case MessageKind::Acquire: {
                SessionEntry* entry = state.agenda_db.find(msg.session);
                if (entry == nullptr) break;
                state.agreed.insert(entry->product);
                events.push_back({StepEvent::Kind::Agreed, msg.session, msg.sender, "acquired"});
                close(msg.session, GoalStatus::Achieved);
                break;
            }
            case MessageKind::Terminate: {
                if (!state.agenda_db.contains(msg.session)) break;
                const auto& reason = std::get<Terminate>(msg.body).reason;
                events.push_back({StepEvent::Kind::Closed, msg.session, msg.sender, reason});
                close(msg.session, GoalStatus::Abandoned);
                break;
            }
        }
    }

    // Resource monitor.
    const double level = poll_resources(state.resources, now);
    state.beliefs.resource_level = level;
    state.beliefs.resources_low = level <= state.resources.r_threshold;
    if (state.role == Perspective::Buyer && state.beliefs.resources_low &&
        !state.agenda_db.empty()) {
        state.tactic = TacticParams::for_stance(Stance::Conceder, state.tactic.k);
    }

    std::map<SessionId, Decision> decisions;
    std::map<ProductId, bool> wants_agreement;
    for (auto& [id, entry] : state.agenda_db.sessions()) {
        entry.t_max_eff = std::min(
            entry.deadline, session_effective_deadline(state.resources, entry.commence_at,
                                                       entry.deadline - entry.commence_at));
        Decision& d = decisions[id];
        if (state.agreed.count(entry.product)) {
            d = {Decision::Kind::Terminate, {}, "agreed-elsewhere"};
            continue;
        }
        const double t_local = static_cast<double>(now - entry.commence_at);
        const Tick eff_local = entry.t_max_eff - entry.commence_at;
        const bool fresh = entry.standing && entry.standing_at == now;
        switch (select_plan(state.plans, state.goals, state.beliefs, id, entry, now)) {
            case PlanKind::Idle:
                break;
            case PlanKind::Terminate:
                d = {Decision::Kind::Terminate, {},
                     now > entry.t_max_eff ? "deadline" : "plan"};
                break;
            case PlanKind::MakeOffer:
                if (!entry.opened) {
                    d = {Decision::Kind::Offer,
                         generate_offer_package(entry.agenda, t_local, eff_local, state.tactic), ""};
                }
                break;
            case PlanKind::Accept:
                if (fresh && acceptable_package(entry.agenda, *entry.standing->package(), entry.role)) {
                    d = {Decision::Kind::Acquire, *entry.standing->package(), ""};
                    wants_agreement[entry.product] = true;
                }
                break;
            case PlanKind::MakeCounter: {
                if (!fresh) break;
                const OfferPackage planned =
                    generate_offer_package(entry.agenda, t_local, eff_local, state.tactic);
                Response r = decide_response(entry.agenda, entry.role, *entry.standing, planned,
                                             now, entry.t_max_eff);
                if (auto* a = std::get_if<Response::Acquire>(&r.kind)) {
                    d = {Decision::Kind::Acquire, a->package, ""};
                    wants_agreement[entry.product] = true;
                } else if (std::holds_alternative<Response::Terminate>(r.kind)) {
                    d = {Decision::Kind::Terminate, {}, "deadline"};
                } else {
                    d = {Decision::Kind::Offer, std::get<Response::Counter>(r.kind).package, ""};
                }
                break;
            }
        }
    }

    // Concurrent sessions on one product: once any of them is ready to
    // agree, take the best fresh acceptable offer and drop the others.
    for (const auto& [product, wanted] : wants_agreement) {
        if (!wanted) continue;
        std::vector<Candidate> candidates;
        for (const auto& [id, entry] : state.agenda_db.sessions()) {
            if (entry.product != product || !entry.standing || entry.standing_at != now) continue;
            if (decisions[id].kind == Decision::Kind::Terminate) continue;
            const OfferPackage& pkg = *entry.standing->package();
            if (!acceptable_package(entry.agenda, pkg, entry.role)) continue;
            candidates.push_back({id, evaluate_package(entry.agenda, pkg, entry.role)});
        }
        const Resolution res = resolve_concurrent_agreements(state.agenda_db, candidates);
        decisions[res.chosen] = {Decision::Kind::Acquire,
                                 *state.agenda_db.find(res.chosen)->standing->package(), ""};
        for (const auto& other : res.terminate) {
            decisions[other] = {Decision::Kind::Terminate, {}, "agreed-elsewhere"};
        }
    }

    for (auto& [id, d] : decisions) {
        SessionEntry* entry = state.agenda_db.find(id);
        // No session may outlive its effective deadline.
        if (d.kind == Decision::Kind::None && now > entry->t_max_eff) {
            d = {Decision::Kind::Terminate, {}, "deadline"};
        }
        switch (d.kind) {
            case Decision::Kind::None:
                break;
            case Decision::Kind::Offer:
                outbox.push_back(make_message(id, *entry, Offer{d.package}));
                entry->opened = true;
                break;
            case Decision::Kind::Acquire:
                outbox.push_back(make_message(id, *entry, Acquire{d.package}));
                state.agreed.insert(entry->product);
                events.push_back({StepEvent::Kind::Agreed, id, entry->opponent, "acquire"});
                close(id, GoalStatus::Achieved);
                break;
            case Decision::Kind::Terminate:
                outbox.push_back(make_message(id, *entry, Terminate{d.reason}));
                events.push_back({StepEvent::Kind::Closed, id, entry->opponent, d.reason});
                close(id, GoalStatus::Abandoned);
                break;
        }
    }

    result.state = std::move(state);
    return result;
}

}  // namespace cloudneg
