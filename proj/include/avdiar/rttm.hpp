#pragma once

#include <string>
#include <vector>

#include "avdiar/types.hpp"

namespace avdiar {

struct RttmParseResult {
  std::vector<RttmRecord> records;   // one per SPEAKER line, input order
  int skipped_records = 0;           // well-formed lines of other record types
};

// Parses 10-field RTTM text. Only SPEAKER records are kept:
//   SPEAKER <file> <chan> <onset> <dur> <NA> <NA> <speaker> <NA> <NA>
// Blank lines and lines starting with ';' are ignored. Other record types
// are skipped and counted. Malformed lines (wrong field count, non-numeric
// times, negative onset, non-positive duration) throw ParseError with the
// 1-based line number.
RttmParseResult parse_rttm(const std::string& text);
RttmParseResult parse_rttm_file(const std::string& path);

// Convenience wrapper that discards the skip counter.
std::vector<RttmRecord> parse_rttm_records(const std::string& text);

// One line per record, times rendered with three decimals:
//   SPEAKER f1 1 0.000 1.000 <NA> <NA> A <NA> <NA>
// parse_rttm(serialize_rttm(recs)) reproduces recs exactly whenever all times
// lie on the millisecond grid. Records are validated first.
std::string serialize_rttm(const std::vector<RttmRecord>& records);
void write_rttm_file(const std::string& path,
                     const std::vector<RttmRecord>& records);

// Merges overlapping or abutting intervals of the same speaker (within
// kTimeEps) and sorts segments by onset. Cross-speaker overlap is preserved.
// All records must share one file_id; mixed input throws Error.
// Idempotent: normalizing a normalized diarization is a no-op.
Diarization normalize_diarization(const std::vector<RttmRecord>& records);

// Splits a multi-recording record list into per-file diarizations, ordered by
// first appearance of each file_id.
std::vector<Diarization> group_by_file(const std::vector<RttmRecord>& records);

// Back to records (channel 1), segment order preserved.
std::vector<RttmRecord> to_records(const Diarization& dia);

}  // namespace avdiar
