#pragma once

// JSON-lines serialization of transcripts and trust archives.

#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "cloudneg/core.hpp"
#include "cloudneg/watchdog.hpp"

namespace cloudneg {

/// One transcript line without the trailing newline. Keys appear as tick,
/// session, sender, receiver, round, kind, values, then kind-specific extras.
std::string transcript_line(const NegotiationMessage& msg);

void write_transcript(std::ostream& out, std::span<const NegotiationMessage> transcript);

/// Throws ParseError naming the 1-based line on malformed input.
Transcript read_transcript(std::istream& in);

std::string trust_line(const TrustRecord& record);
void write_trust_archive(std::ostream& out, const TrustArchive& archive);

/// Per-session and per-agent summary of a transcript read back from disk.
std::string summarize_transcript(const Transcript& transcript);

}  // namespace cloudneg
