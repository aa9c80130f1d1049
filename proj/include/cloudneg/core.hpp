#pragma once

// Domain types shared by the negotiation simulator.

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cloudneg {

/// Virtual time, in integer ticks.
using Tick = std::int64_t;

enum class Errc {
    WeightSumViolation,
    EmptyAgenda,
    BadRange,
    BadDeadline,
    BadWeight,
    DuplicateIssue,
    OutOfRange,
    MissingIssue,
    InvalidTactic,
    InvalidProjection,
    UnknownAgent,
    DuplicateId,
    AlreadyAgreed,
    UnknownSession,
    SessionClosed,
    ClockRegression,
    EmptyCandidates,
    ParseError,
    ValidationError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Opaque non-empty identifier. The tag keeps agent, session and product ids
/// from being mixed up.
template <typename Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {
        if (value_.empty()) {
            throw Error(Errc::ValidationError, "identifier must be non-empty");
        }
    }

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;

private:
    std::string value_;
};

using AgentId = Id<struct AgentIdTag>;
using SessionId = Id<struct SessionIdTag>;
using ProductId = Id<struct ProductIdTag>;

/// Sender id the marketplace uses on Commence and closing messages.
inline constexpr std::string_view kMarketplaceId = "marketplace";

enum class Direction { Ascending, Descending };
enum class Perspective { Buyer, Seller };

std::string_view to_string(Direction d);
std::string_view to_string(Perspective p);
Perspective opposite(Perspective p);

struct IssueSpec {
    std::string issue_id;
    double weight = 1.0;
    double min_value = 0.0;
    double max_value = 1.0;
    Direction direction = Direction::Ascending;
};

struct Agenda {
    std::vector<IssueSpec> issues;
    Tick t_max = 0;
    Tick t_min = 0;
};

/// An agenda that has passed validate_agenda. Only that function builds one.
class ValidatedAgenda {
public:
    const Agenda& get() const noexcept { return agenda_; }
    const std::vector<IssueSpec>& issues() const noexcept { return agenda_.issues; }
    Tick t_max() const noexcept { return agenda_.t_max; }
    Tick t_min() const noexcept { return agenda_.t_min; }

    /// Returns nullptr when the issue is not on the agenda.
    const IssueSpec* find(std::string_view issue_id) const;

private:
    explicit ValidatedAgenda(Agenda agenda) : agenda_(std::move(agenda)) {}
    friend ValidatedAgenda validate_agenda(Agenda agenda);

    Agenda agenda_;
};

inline constexpr double kWeightSumTolerance = 1e-9;

/// Throws Error with one of WeightSumViolation, EmptyAgenda, BadRange,
/// BadDeadline, BadWeight or DuplicateIssue.
ValidatedAgenda validate_agenda(Agenda agenda);

/// Restricts an agenda to `issue_ids` (in that order) and rescales the
/// remaining weights to sum to one. `t_max` replaces the agenda deadline.
ValidatedAgenda restrict_agenda(const ValidatedAgenda& agenda,
                                const std::vector<std::string>& issue_ids,
                                Tick t_max);

struct OfferPackage {
    std::map<std::string, double> values;

    friend bool operator==(const OfferPackage&, const OfferPackage&) = default;
};

class Score {
public:
    explicit Score(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// Linear normalization of an in-range value: Buyer prefers low values,
/// Seller prefers high ones. Throws OutOfRange outside [min, max].
Score issue_score(const IssueSpec& spec, double offered, Perspective perspective);

/// Same map with the offered value clamped into [min, max] first, so values
/// beyond an agent's own range saturate at 0 or 1.
Score saturated_score(const IssueSpec& spec, double offered, Perspective perspective);

/// True when `offered` is no worse than the agent's reservation value
/// (Buyer: at most max; Seller: at least min).
bool within_reservation(const IssueSpec& spec, double offered, Perspective perspective);

// Negotiation messages.

struct Range {
    double min = 0.0;
    double max = 0.0;
    friend bool operator==(const Range&, const Range&) = default;
};

struct CommencePayload {
    ProductId product;
    AgentId buyer;
    AgentId seller;
    /// Negotiation space per shared issue, keyed by issue id.
    std::map<std::string, Range> space;
    Tick t_max = 0;
};

struct Commence {
    CommencePayload info;
};
struct Offer {
    OfferPackage package;
};
struct Acquire {
    OfferPackage package;
};
struct Terminate {
    std::string reason;
};

using MessageBody = std::variant<Commence, Offer, Acquire, Terminate>;

enum class MessageKind { Commence, Offer, Acquire, Terminate };
std::string_view to_string(MessageKind kind);

struct NegotiationMessage {
    SessionId session;
    AgentId sender;
    AgentId receiver;
    std::int64_t round = 0;
    Tick sent_at = 0;
    MessageBody body;

    MessageKind kind() const noexcept { return static_cast<MessageKind>(body.index()); }

    /// Offer or Acquire package; nullptr for the other kinds.
    const OfferPackage* package() const noexcept;
};

/// Canonical delivery order: (sent_at, session, sender, round, receiver).
bool canonical_less(const NegotiationMessage& a, const NegotiationMessage& b);

}  // namespace cloudneg
