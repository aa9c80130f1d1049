#include "cloudneg/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace cloudneg {

ScenarioError::ScenarioError(Errc code, std::string path, int line, const std::string& reason)
    : Error(code, code == Errc::ParseError
                      ? fmt::format("line {}: {}", line, reason)
                      : (line > 0 ? fmt::format("{} (line {}): {}", path, line, reason)
                                  : fmt::format("{}: {}", path, reason))),
      path_(std::move(path)),
      line_(line),
      reason_(reason) {}

const AgentSpec* Scenario::find_agent(const AgentId& id) const {
    for (const auto& a : agents)
        if (a.id == id) return &a;
    return nullptr;
}

namespace {

int line_of(const YAML::Node& node) {
    const YAML::Mark m = node.Mark();
    return m.is_null() ? 0 : m.line + 1;
}

[[noreturn]] void fail(const std::string& path, const YAML::Node& node, const std::string& reason) {
    throw ScenarioError(Errc::ValidationError, path, line_of(node), reason);
}

/// Map node reader that rejects unknown keys.
class Fields {
public:
    Fields(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.IsMap()) fail(path_, node_, "expected a mapping");
    }

    const std::string& path() const { return path_; }
    const YAML::Node& node() const { return node_; }
    std::string child(std::string_view key) const { return fmt::format("{}.{}", path_, key); }

    bool has(const char* key) {
        used_.insert(key);
        return static_cast<bool>(node_[key]);
    }

    YAML::Node get(const char* key) {
        used_.insert(key);
        YAML::Node n = node_[key];
        if (!n) fail(path_, node_, fmt::format("missing required key '{}'", key));
        return n;
    }

    template <typename T>
    T scalar(const char* key) {
        return convert<T>(get(key), child(key));
    }

    template <typename T>
    T scalar_or(const char* key, T fallback) {
        return has(key) ? scalar<T>(key) : fallback;
    }

    void finish() const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key)) fail(child(key), kv.first, "unknown key");
        }
    }

    template <typename T>
    static T convert(const YAML::Node& n, const std::string& path) {
        if (!n.IsScalar()) fail(path, n, "expected a scalar");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(path, n, fmt::format("cannot read '{}' as a {}", n.Scalar(), type_name<T>()));
        }
    }

private:
    template <typename T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, double>) return "number";
        else if constexpr (std::is_same_v<T, bool>) return "boolean";
        else if constexpr (std::is_integral_v<T>) return "integer";
        else return "string";
    }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

YAML::Node sequence(Fields& f, const char* key, bool required) {
    if (!required && !f.has(key)) return YAML::Node(YAML::NodeType::Sequence);
    YAML::Node n = f.get(key);
    if (!n.IsSequence()) fail(f.child(key), n, "expected a list");
    return n;
}

std::string item_path(const std::string& base, std::size_t i) {
    return fmt::format("{}[{}]", base, i);
}

Perspective parse_role(const std::string& s, const std::string& path, const YAML::Node& n) {
    if (s == "buyer") return Perspective::Buyer;
    if (s == "seller") return Perspective::Seller;
    fail(path, n, fmt::format("role must be 'buyer' or 'seller', got '{}'", s));
}

Stance parse_stance(const std::string& s, const std::string& path, const YAML::Node& n) {
    if (s == "headstrong") return Stance::Headstrong;
    if (s == "linear") return Stance::Linear;
    if (s == "conceder") return Stance::Conceder;
    fail(path, n, fmt::format("unknown stance '{}'", s));
}

template <typename Fn>
auto rethrow_as_validation(const std::string& path, const YAML::Node& n, Fn&& fn) {
    try {
        return fn();
    } catch (const ScenarioError&) {
        throw;
    } catch (const Error& e) {
        fail(path, n, fmt::format("{}: {}", to_string(e.code()), e.what()));
    }
}

ValidatedAgenda parse_agenda(Fields& f, Perspective role) {
    Agenda agenda;
    agenda.t_max = f.scalar<Tick>("t_max");
    agenda.t_min = f.scalar_or<Tick>("t_min", 0);
    YAML::Node issues = sequence(f, "issues", true);
    const std::string issues_path = f.child("issues");
    for (std::size_t i = 0; i < issues.size(); ++i) {
        Fields issue(issues[i], item_path(issues_path, i));
        IssueSpec spec;
        spec.issue_id = issue.scalar<std::string>("id");
        spec.weight = issue.scalar<double>("weight");
        spec.min_value = issue.scalar<double>("min");
        spec.max_value = issue.scalar<double>("max");
        spec.direction = role == Perspective::Buyer ? Direction::Ascending : Direction::Descending;
        if (issue.has("direction")) {
            const auto d = issue.scalar<std::string>("direction");
            if (d == "ascending") spec.direction = Direction::Ascending;
            else if (d == "descending") spec.direction = Direction::Descending;
            else fail(issue.child("direction"), issue.get("direction"), "expected ascending|descending");
        }
        issue.finish();
        agenda.issues.push_back(std::move(spec));
    }
    return rethrow_as_validation(f.path(), f.node(),
                                 [&] { return validate_agenda(std::move(agenda)); });
}

AgentSpec parse_agent(const YAML::Node& node, const std::string& path) {
    Fields f(node, path);
    AgentSpec a;
    a.id = rethrow_as_validation(f.child("id"), node,
                                 [&] { return AgentId(f.scalar<std::string>("id")); });
    if (a.id.str() == kMarketplaceId) fail(f.child("id"), node, "id is reserved");
    a.role = parse_role(f.scalar<std::string>("role"), f.child("role"), node);

    a.tactic = TacticParams::for_stance(Stance::Linear);
    if (f.has("tactic")) {
        Fields t(f.get("tactic"), f.child("tactic"));
        if (t.has("stance")) {
            a.tactic.stance = parse_stance(t.scalar<std::string>("stance"), t.child("stance"),
                                           t.get("stance"));
            a.tactic.beta = stance_beta(a.tactic.stance);
        }
        a.tactic.k = t.scalar_or<double>("k", 0.0);
        a.tactic.beta = t.scalar_or<double>("beta", a.tactic.beta);
        t.finish();
        rethrow_as_validation(t.path(), t.node(), [&] {
            validate_tactic(a.tactic);
            return 0;
        });
    }
    a.opening_jitter = f.scalar_or<double>("opening_jitter", 0.0);
    if (!(a.opening_jitter >= 0.0 && a.opening_jitter <= 1.0)) {
        fail(f.child("opening_jitter"), node, "must lie in [0,1]");
    }

    if (f.has("resources")) {
        Fields r(f.get("resources"), f.child("resources"));
        a.resources.r_threshold = r.scalar_or<double>("r_threshold", a.resources.r_threshold);
        YAML::Node sched = sequence(r, "schedule", true);
        std::vector<ResourceSchedule::Knot> knots;
        for (std::size_t i = 0; i < sched.size(); ++i) {
            const std::string p = item_path(r.child("schedule"), i);
            if (!sched[i].IsSequence() || sched[i].size() != 2) {
                fail(p, sched[i], "expected [tick, level]");
            }
            knots.emplace_back(Fields::convert<Tick>(sched[i][0], p),
                               Fields::convert<double>(sched[i][1], p));
        }
        r.finish();
        a.resources.schedule = rethrow_as_validation(
            r.path(), r.node(), [&] { return ResourceSchedule(std::move(knots)); });
        rethrow_as_validation(r.path(), r.node(), [&] {
            validate_projection(a.resources);
            return 0;
        });
    }

    if (f.has("plans")) {
        YAML::Node plans = sequence(f, "plans", true);
        std::vector<PlanRule> rules;
        for (std::size_t i = 0; i < plans.size(); ++i) {
            Fields rule(plans[i], item_path(f.child("plans"), i));
            const auto when = rule.scalar<std::string>("when");
            const auto what = rule.scalar<std::string>("do");
            auto trig = trigger_from_string(when);
            auto kind = plan_kind_from_string(what);
            if (!trig) fail(rule.child("when"), plans[i], fmt::format("unknown trigger '{}'", when));
            if (!kind) fail(rule.child("do"), plans[i], fmt::format("unknown plan '{}'", what));
            rule.finish();
            rules.push_back({*trig, *kind});
        }
        a.plans = rethrow_as_validation(f.child("plans"), f.get("plans"),
                                        [&] { return PlanLibrary(std::move(rules)); });
    }

    YAML::Node agendas = sequence(f, "agendas", true);
    for (std::size_t i = 0; i < agendas.size(); ++i) {
        Fields ag(agendas[i], item_path(f.child("agendas"), i));
        ProductId product = rethrow_as_validation(
            ag.child("product"), agendas[i], [&] { return ProductId(ag.scalar<std::string>("product")); });
        ValidatedAgenda agenda = parse_agenda(ag, a.role);
        ag.finish();
        if (!a.agendas.emplace(product, std::move(agenda)).second) {
            fail(ag.path(), agendas[i], fmt::format("second agenda for product '{}'", product.str()));
        }
    }
    f.finish();
    return a;
}

struct Posting {
    AgentId agent;
    ProductId product;
    std::vector<std::string> issues;
    Tick posted_at = 0;
    std::string id;
    double min_reputation = 0.0;
};

Posting parse_posting(const YAML::Node& node, const std::string& path, bool is_rfq) {
    Fields f(node, path);
    Posting p;
    p.agent = rethrow_as_validation(f.child("agent"), node,
                                    [&] { return AgentId(f.scalar<std::string>("agent")); });
    p.product = rethrow_as_validation(f.child("product"), node,
                                      [&] { return ProductId(f.scalar<std::string>("product")); });
    p.posted_at = f.scalar_or<Tick>("posted_at", 0);
    if (p.posted_at < 0) fail(f.child("posted_at"), node, "must be non-negative");
    p.id = f.scalar_or<std::string>("id", "");
    YAML::Node issues = sequence(f, "issues", false);
    for (std::size_t i = 0; i < issues.size(); ++i) {
        p.issues.push_back(Fields::convert<std::string>(issues[i], item_path(f.child("issues"), i)));
    }
    if (is_rfq) {
        p.min_reputation = f.scalar_or<double>("min_reputation", 0.0);
        if (!(p.min_reputation >= 0.0 && p.min_reputation <= 1.0)) {
            fail(f.child("min_reputation"), node, "must lie in [0,1]");
        }
    }
    f.finish();
    return p;
}

/// Resolves a posting's issues against the agent's agenda.
std::vector<IssueRange> resolve_issues(const Posting& p, const ValidatedAgenda& agenda,
                                       const std::string& path, const YAML::Node& node) {
    std::vector<IssueRange> out;
    if (p.issues.empty()) {
        for (const auto& s : agenda.issues()) out.push_back({s.issue_id, {s.min_value, s.max_value}});
        return out;
    }
    std::set<std::string> seen;
    for (const auto& id : p.issues) {
        const IssueSpec* s = agenda.find(id);
        if (s == nullptr) fail(path, node, fmt::format("issue '{}' is not on the agent's agenda", id));
        if (!seen.insert(id).second) fail(path, node, fmt::format("issue '{}' listed twice", id));
        out.push_back({s->issue_id, {s->min_value, s->max_value}});
    }
    return out;
}

}  // namespace

Scenario load_scenario(std::string_view document) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(document));
    } catch (const YAML::ParserException& e) {
        throw ScenarioError(Errc::ParseError, "", e.mark.line + 1, e.msg);
    }
    if (!root || root.IsNull()) {
        throw ScenarioError(Errc::ParseError, "", 1, "empty document");
    }

    Scenario sc;
    Fields f(root, "scenario");
    sc.t_end = f.scalar<Tick>("t_end");
    if (sc.t_end < 0) fail(f.child("t_end"), root, "must be non-negative");
    sc.seed = f.scalar_or<std::uint64_t>("seed", 0);
    sc.epoch = f.scalar_or<std::string>("epoch", "");
    if (f.has("matchmaking")) {
        Fields m(f.get("matchmaking"), f.child("matchmaking"));
        sc.require_overlap = m.scalar_or<bool>("require_overlap", true);
        m.finish();
    }

    YAML::Node agents = sequence(f, "agents", true);
    std::map<AgentId, std::size_t> index;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        const std::string path = item_path("scenario.agents", i);
        AgentSpec a = parse_agent(agents[i], path);
        if (!index.emplace(a.id, i).second) {
            fail(path + ".id", agents[i], fmt::format("duplicate agent id '{}'", a.id.str()));
        }
        for (const auto& [product, agenda] : a.agendas) {
            if (agenda.t_max() > sc.t_end) {
                fail(path + ".agendas", agents[i],
                     fmt::format("t_max {} for '{}' exceeds t_end {}", agenda.t_max(),
                                 product.str(), sc.t_end));
            }
        }
        sc.agents.push_back(std::move(a));
    }
    std::sort(sc.agents.begin(), sc.agents.end(),
              [](const AgentSpec& a, const AgentSpec& b) { return a.id < b.id; });

    std::set<std::string> ids;
    auto check_id = [&](const std::string& id, const std::string& path, const YAML::Node& n) {
        if (!id.empty() && !ids.insert(id).second) fail(path, n, fmt::format("duplicate id '{}'", id));
    };
    auto lookup = [&](const Posting& p, const std::string& path,
                      const YAML::Node& n) -> std::pair<const AgentSpec*, const ValidatedAgenda*> {
        const AgentSpec* a = sc.find_agent(p.agent);
        if (a == nullptr) fail(path + ".agent", n, fmt::format("unknown agent '{}'", p.agent.str()));
        auto it = a->agendas.find(p.product);
        if (it == a->agendas.end()) {
            fail(path + ".product", n,
                 fmt::format("agent '{}' has no agenda for '{}'", p.agent.str(), p.product.str()));
        }
        return {a, &it->second};
    };

    YAML::Node ads = sequence(f, "advertisements", false);
    for (std::size_t i = 0; i < ads.size(); ++i) {
        const std::string path = item_path("scenario.advertisements", i);
        Posting p = parse_posting(ads[i], path, false);
        auto [agent, agenda] = lookup(p, path, ads[i]);
        check_id(p.id, path + ".id", ads[i]);
        Advertisement ad{p.id, p.agent, p.product, agent->role,
                         resolve_issues(p, *agenda, path + ".issues", ads[i]), agenda->t_max(),
                         p.posted_at};
        sc.advertisements.push_back(std::move(ad));
    }
    YAML::Node rfqs = sequence(f, "rfqs", false);
    for (std::size_t i = 0; i < rfqs.size(); ++i) {
        const std::string path = item_path("scenario.rfqs", i);
        Posting p = parse_posting(rfqs[i], path, true);
        auto [agent, agenda] = lookup(p, path, rfqs[i]);
        check_id(p.id, path + ".id", rfqs[i]);
        Rfq rfq{p.id,
                p.agent,
                p.product,
                agent->role,
                resolve_issues(p, *agenda, path + ".issues", rfqs[i]),
                p.min_reputation,
                agenda->t_max(),
                p.posted_at};
        sc.rfqs.push_back(std::move(rfq));
    }
    f.finish();
    return sc;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::ValidationError, fmt::format("cannot open '{}'", path.string()));
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

}  // namespace cloudneg
