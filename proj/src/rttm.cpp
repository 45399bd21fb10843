#include "avdiar/rttm.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace avdiar {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) fields.push_back(tok);
  return fields;
}

double parse_double_field(const std::string& tok, int line_no,
                          const char* what) {
  double value = 0.0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line_no, std::string("expected numeric ") + what +
                                  ", got '" + tok + "'");
  }
  return value;
}

int parse_int_field(const std::string& tok, int line_no, const char* what) {
  int value = 0;
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line_no, std::string("expected integer ") + what +
                                  ", got '" + tok + "'");
  }
  return value;
}

}  // namespace

RttmParseResult parse_rttm(const std::string& text) {
  RttmParseResult result;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_fields(line);
    if (fields.empty()) continue;          // blank
    if (fields[0][0] == ';') continue;     // comment
    if (fields[0] != "SPEAKER") {
      ++result.skipped_records;
      continue;
    }
    if (fields.size() != 10) {
      throw ParseError(line_no, "SPEAKER record needs 10 fields, got " +
                                    std::to_string(fields.size()));
    }
    RttmRecord rec;
    rec.file_id = fields[1];
    rec.channel = parse_int_field(fields[2], line_no, "channel");
    double onset = parse_double_field(fields[3], line_no, "onset");
    double duration = parse_double_field(fields[4], line_no, "duration");
    if (onset < 0.0) {
      throw ParseError(line_no, "negative onset " + fields[3]);
    }
    if (duration <= 0.0) {
      throw ParseError(line_no, "duration must be positive, got " + fields[4]);
    }
    rec.interval = TimeInterval{onset, onset + duration};
    rec.speaker = fields[7];
    result.records.push_back(std::move(rec));
  }
  return result;
}

RttmParseResult parse_rttm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open RTTM file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rttm(buf.str());
}

std::vector<RttmRecord> parse_rttm_records(const std::string& text) {
  return parse_rttm(text).records;
}

std::string serialize_rttm(const std::vector<RttmRecord>& records) {
  std::string out;
  char buf[256];
  for (const auto& rec : records) {
    validate_record(rec);
    int n = std::snprintf(buf, sizeof(buf),
                          "SPEAKER %s %d %.3f %.3f <NA> <NA> %s <NA> <NA>\n",
                          rec.file_id.c_str(), rec.channel, rec.interval.onset,
                          rec.interval.duration(), rec.speaker.c_str());
    if (n < 0 || n >= static_cast<int>(sizeof(buf))) {
      throw Error("record too long to serialize (file_id '" + rec.file_id +
                  "')");
    }
    out.append(buf, static_cast<size_t>(n));
  }
  return out;
}

void write_rttm_file(const std::string& path,
                     const std::vector<RttmRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write RTTM file: " + path);
  out << serialize_rttm(records);
  if (!out) throw Error("failed writing RTTM file: " + path);
}

Diarization normalize_diarization(const std::vector<RttmRecord>& records) {
  Diarization dia;
  if (records.empty()) return dia;
  dia.file_id = records.front().file_id;
  for (const auto& rec : records) {
    validate_record(rec);
    if (rec.file_id != dia.file_id) {
      throw Error("mixed file_ids in one diarization: '" + dia.file_id +
                  "' vs '" + rec.file_id + "'");
    }
  }

  std::map<std::string, std::vector<TimeInterval>> per_speaker;
  for (const auto& rec : records) {
    per_speaker[rec.speaker].push_back(rec.interval);
  }
  for (auto& [speaker, intervals] : per_speaker) {
    std::sort(intervals.begin(), intervals.end(),
              [](const TimeInterval& a, const TimeInterval& b) {
                return a.onset < b.onset ||
                       (a.onset == b.onset && a.offset < b.offset);
              });
    std::vector<TimeInterval> merged;
    for (const auto& iv : intervals) {
      if (!merged.empty() && iv.onset <= merged.back().offset + kTimeEps) {
        merged.back().offset = std::max(merged.back().offset, iv.offset);
      } else {
        merged.push_back(iv);
      }
    }
    for (const auto& iv : merged) dia.segments.emplace_back(iv, speaker);
  }

  std::sort(dia.segments.begin(), dia.segments.end(),
            [](const auto& a, const auto& b) {
              if (a.first.onset != b.first.onset)
                return a.first.onset < b.first.onset;
              if (a.first.offset != b.first.offset)
                return a.first.offset < b.first.offset;
              return a.second < b.second;
            });
  return dia;
}

std::vector<Diarization> group_by_file(const std::vector<RttmRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<RttmRecord>> by_file;
  for (const auto& rec : records) {
    if (!by_file.count(rec.file_id)) order.push_back(rec.file_id);
    by_file[rec.file_id].push_back(rec);
  }
  std::vector<Diarization> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(normalize_diarization(by_file[id]));
  return out;
}

std::vector<RttmRecord> to_records(const Diarization& dia) {
  std::vector<RttmRecord> recs;
  recs.reserve(dia.segments.size());
  for (const auto& [iv, speaker] : dia.segments) {
    recs.push_back(RttmRecord{dia.file_id, 1, iv, speaker});
  }
  return recs;
}

}  // namespace avdiar
