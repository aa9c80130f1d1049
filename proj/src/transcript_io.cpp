#include "cloudneg/transcript_io.hpp"

#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace cloudneg {

namespace {

using Json = nlohmann::ordered_json;

Json values_json(const OfferPackage* pkg) {
    Json values = Json::object();
    if (pkg != nullptr) {
        for (const auto& [issue, v] : pkg->values) values[issue] = v;
    }
    return values;
}

MessageKind kind_from(const std::string& s, int line) {
    for (auto k : {MessageKind::Commence, MessageKind::Offer, MessageKind::Acquire,
                   MessageKind::Terminate}) {
        if (to_string(k) == s) return k;
    }
    throw Error(Errc::ParseError, fmt::format("line {}: unknown message kind '{}'", line, s));
}

OfferPackage package_from(const Json& j) {
    OfferPackage pkg;
    for (const auto& [issue, v] : j.items()) pkg.values[issue] = v.get<double>();
    return pkg;
}

NegotiationMessage message_from(const Json& j, int line) {
    NegotiationMessage m;
    m.sent_at = j.at("tick").get<Tick>();
    m.session = SessionId(j.at("session").get<std::string>());
    m.sender = AgentId(j.at("sender").get<std::string>());
    m.receiver = AgentId(j.at("receiver").get<std::string>());
    m.round = j.at("round").get<std::int64_t>();
    switch (kind_from(j.at("kind").get<std::string>(), line)) {
        case MessageKind::Commence: {
            CommencePayload info{ProductId(j.at("product").get<std::string>()),
                                 AgentId(j.at("buyer").get<std::string>()),
                                 AgentId(j.at("seller").get<std::string>()),
                                 {},
                                 j.at("t_max").get<Tick>()};
            for (const auto& [issue, r] : j.at("space").items()) {
                info.space[issue] = Range{r.at(0).get<double>(), r.at(1).get<double>()};
            }
            m.body = Commence{std::move(info)};
            break;
        }
        case MessageKind::Offer: m.body = Offer{package_from(j.at("values"))}; break;
        case MessageKind::Acquire: m.body = Acquire{package_from(j.at("values"))}; break;
        case MessageKind::Terminate:
            m.body = Terminate{j.value("reason", std::string{})};
            break;
    }
    return m;
}

}  // namespace

std::string transcript_line(const NegotiationMessage& msg) {
    Json j;
    j["tick"] = msg.sent_at;
    j["session"] = msg.session.str();
    j["sender"] = msg.sender.str();
    j["receiver"] = msg.receiver.str();
    j["round"] = msg.round;
    j["kind"] = std::string(to_string(msg.kind()));
    j["values"] = values_json(msg.package());
    if (const auto* c = std::get_if<Commence>(&msg.body)) {
        j["product"] = c->info.product.str();
        j["buyer"] = c->info.buyer.str();
        j["seller"] = c->info.seller.str();
        j["t_max"] = c->info.t_max;
        Json space = Json::object();
        for (const auto& [issue, r] : c->info.space) space[issue] = Json::array({r.min, r.max});
        j["space"] = space;
    } else if (const auto* t = std::get_if<Terminate>(&msg.body)) {
        j["reason"] = t->reason;
    }
    return j.dump();
}

void write_transcript(std::ostream& out, std::span<const NegotiationMessage> transcript) {
    for (const auto& m : transcript) out << transcript_line(m) << '\n';
}

Transcript read_transcript(std::istream& in) {
    Transcript out;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(message_from(Json::parse(text), line));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(Errc::ParseError, fmt::format("line {}: {}", line, e.what()));
        }
    }
    return out;
}

std::string trust_line(const TrustRecord& r) {
    Json j;
    j["agent"] = r.agent.str();
    j["B"] = r.behavior_norm;
    j["R"] = r.reputation;
    j["behavior"] = std::string(to_string(classify_behavior(r.behavior_norm)));
    Json stats;
    stats["sessions"] = r.sessions_observed;
    stats["agreements"] = r.agreement_count;
    stats["messages_sent"] = r.messages_sent;
    stats["violations"] = r.compliance_violations;
    if (r.mean_rounds_to_agreement) {
        stats["mean_rounds_to_agreement"] = *r.mean_rounds_to_agreement;
    } else {
        stats["mean_rounds_to_agreement"] = nullptr;
    }
    j["stats"] = stats;
    return j.dump();
}

void write_trust_archive(std::ostream& out, const TrustArchive& archive) {
    for (const auto& [id, r] : archive.records()) out << trust_line(r) << '\n';
}

std::string summarize_transcript(const Transcript& transcript) {
    std::map<SessionId, Transcript> by_session;
    std::set<AgentId> agents;
    std::map<AgentId, std::int64_t> sent;
    for (const auto& m : transcript) {
        by_session[m.session].push_back(m);
        if (m.sender.str() != kMarketplaceId) {
            agents.insert(m.sender);
            ++sent[m.sender];
        }
    }

    std::string out = fmt::format("Transcript summary\nmessages: {}  sessions: {}\n\n",
                                  transcript.size(), by_session.size());
    out += fmt::format("{:<10} {:>8} {:>6} {:<10} {:>6}  {}\n", "SESSION", "MESSAGES", "OFFERS",
                       "OUTCOME", "CLOSED", "DETAIL");
    for (const auto& [id, msgs] : by_session) {
        std::int64_t offers = 0;
        std::string outcome = "open";
        std::string detail;
        Tick closed = msgs.back().sent_at;
        for (const auto& m : msgs) {
            if (m.kind() == MessageKind::Offer) ++offers;
            if (m.kind() == MessageKind::Acquire && outcome == "open") {
                outcome = "agreed";
                closed = m.sent_at;
                for (const auto& [issue, v] : m.package()->values) {
                    detail += fmt::format("{}{}={}", detail.empty() ? "" : " ", issue, v);
                }
            }
            if (const auto* t = std::get_if<Terminate>(&m.body); t && outcome == "open") {
                outcome = "terminated";
                closed = m.sent_at;
                detail = t->reason;
            }
        }
        out += fmt::format("{:<10} {:>8} {:>6} {:<10} {:>6}  {}\n", id.str(), msgs.size(), offers,
                           outcome, closed, detail);
    }

    std::vector<Transcript> sessions;
    for (auto& [id, msgs] : by_session) sessions.push_back(msgs);
    out += fmt::format("\n{:<12} {:>6} {:>8} {:<10}\n", "AGENT", "SENT", "B", "BEHAVIOR");
    for (const auto& a : agents) {
        const double b = compute_behavior_norm(sessions, a);
        out += fmt::format("{:<12} {:>6} {:>8.4f} {:<10}\n", a.str(), sent[a], b,
                           to_string(classify_behavior(b)));
    }
    return out;
}

}  // namespace cloudneg
