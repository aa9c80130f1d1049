#include "cloudneg/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/format.h>

namespace cloudneg {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::WeightSumViolation: return "WeightSumViolation";
        case Errc::EmptyAgenda: return "EmptyAgenda";
        case Errc::BadRange: return "BadRange";
        case Errc::BadDeadline: return "BadDeadline";
        case Errc::BadWeight: return "BadWeight";
        case Errc::DuplicateIssue: return "DuplicateIssue";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::MissingIssue: return "MissingIssue";
        case Errc::InvalidTactic: return "InvalidTactic";
        case Errc::InvalidProjection: return "InvalidProjection";
        case Errc::UnknownAgent: return "UnknownAgent";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::AlreadyAgreed: return "AlreadyAgreed";
        case Errc::UnknownSession: return "UnknownSession";
        case Errc::SessionClosed: return "SessionClosed";
        case Errc::ClockRegression: return "ClockRegression";
        case Errc::EmptyCandidates: return "EmptyCandidates";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
    }
    return "?";
}

std::string_view to_string(Direction d) {
    return d == Direction::Ascending ? "ascending" : "descending";
}

std::string_view to_string(Perspective p) {
    return p == Perspective::Buyer ? "buyer" : "seller";
}

Perspective opposite(Perspective p) {
    return p == Perspective::Buyer ? Perspective::Seller : Perspective::Buyer;
}

std::string_view to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::Commence: return "commence";
        case MessageKind::Offer: return "offer";
        case MessageKind::Acquire: return "acquire";
        case MessageKind::Terminate: return "terminate";
    }
    return "?";
}

const IssueSpec* ValidatedAgenda::find(std::string_view issue_id) const {
    auto it = std::find_if(agenda_.issues.begin(), agenda_.issues.end(),
                           [&](const IssueSpec& s) { return s.issue_id == issue_id; });
    return it == agenda_.issues.end() ? nullptr : &*it;
}

ValidatedAgenda validate_agenda(Agenda agenda) {
    if (agenda.issues.empty()) {
        throw Error(Errc::EmptyAgenda, "agenda has no issues");
    }
    std::set<std::string> seen;
    double weight_sum = 0.0;
    for (const auto& issue : agenda.issues) {
        if (issue.issue_id.empty()) {
            throw Error(Errc::ValidationError, "issue id must be non-empty");
        }
        if (!seen.insert(issue.issue_id).second) {
            throw Error(Errc::DuplicateIssue,
                        fmt::format("issue '{}' listed twice", issue.issue_id));
        }
        if (!(issue.weight > 0.0 && issue.weight <= 1.0)) {
            throw Error(Errc::BadWeight,
                        fmt::format("issue '{}' weight {} outside (0,1]", issue.issue_id,
                                    issue.weight));
        }
        if (!(issue.min_value < issue.max_value)) {
            throw Error(Errc::BadRange,
                        fmt::format("issue '{}' range [{}, {}] is empty", issue.issue_id,
                                    issue.min_value, issue.max_value));
        }
        weight_sum += issue.weight;
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
        throw Error(Errc::WeightSumViolation,
                    fmt::format("issue weights sum to {}, expected 1", weight_sum));
    }
    if (agenda.t_min < 0 || agenda.t_min > agenda.t_max) {
        throw Error(Errc::BadDeadline,
                    fmt::format("deadline window [{}, {}] is invalid", agenda.t_min,
                                agenda.t_max));
    }
    return ValidatedAgenda(std::move(agenda));
}

ValidatedAgenda restrict_agenda(const ValidatedAgenda& agenda,
                                const std::vector<std::string>& issue_ids, Tick t_max) {
    Agenda out;
    out.t_max = t_max;
    out.t_min = std::min(agenda.t_min(), t_max);
    double total = 0.0;
    for (const auto& id : issue_ids) {
        const IssueSpec* spec = agenda.find(id);
        if (spec == nullptr) {
            throw Error(Errc::MissingIssue, fmt::format("issue '{}' not on agenda", id));
        }
        out.issues.push_back(*spec);
        total += spec->weight;
    }
    for (auto& issue : out.issues) {
        issue.weight /= total;
    }
    // Rescaling can leave the sum a few ulps away from one; push the residue
    // into the last issue.
    if (!out.issues.empty()) {
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < out.issues.size(); ++i) sum += out.issues[i].weight;
        if (out.issues.size() > 1) out.issues.back().weight = 1.0 - sum;
    }
    return validate_agenda(std::move(out));
}

Score::Score(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(Errc::OutOfRange, fmt::format("score {} outside [0,1]", value));
    }
}

Score issue_score(const IssueSpec& spec, double offered, Perspective perspective) {
    if (!(offered >= spec.min_value && offered <= spec.max_value)) {
        throw Error(Errc::OutOfRange,
                    fmt::format("value {} for issue '{}' outside [{}, {}]", offered,
                                spec.issue_id, spec.min_value, spec.max_value));
    }
    const double span = spec.max_value - spec.min_value;
    const double s = perspective == Perspective::Buyer ? (spec.max_value - offered) / span
                                                       : (offered - spec.min_value) / span;
    return Score(std::clamp(s, 0.0, 1.0));
}

Score saturated_score(const IssueSpec& spec, double offered, Perspective perspective) {
    return issue_score(spec, std::clamp(offered, spec.min_value, spec.max_value), perspective);
}

bool within_reservation(const IssueSpec& spec, double offered, Perspective perspective) {
    return perspective == Perspective::Buyer ? offered <= spec.max_value
                                             : offered >= spec.min_value;
}

const OfferPackage* NegotiationMessage::package() const noexcept {
    if (const auto* o = std::get_if<Offer>(&body)) return &o->package;
    if (const auto* a = std::get_if<Acquire>(&body)) return &a->package;
    return nullptr;
}

bool canonical_less(const NegotiationMessage& a, const NegotiationMessage& b) {
    return std::tie(a.sent_at, a.session, a.sender, a.round, a.receiver) <
           std::tie(b.sent_at, b.session, b.sender, b.round, b.receiver);
}

}  // namespace cloudneg
