#include "hazardband/event_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace hazardband {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

double parse_time(std::string_view field, std::size_t line, const char* column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(line, std::string("non-numeric ") + column + " time '" + std::string(field) + "'");
  }
  return value;
}

void check_record(const SubjectRecord& r) {
  if (!(r.entry_time >= 0.0)) {
    throw ValidationError("subject " + r.subject_id + ": negative entry time");
  }
  if (!(r.entry_time < r.exit_time)) {
    throw ValidationError("subject " + r.subject_id + ": entry time " + std::to_string(r.entry_time) +
                          " is not before exit time " + std::to_string(r.exit_time));
  }
  if (r.from_state.empty()) throw ValidationError("subject " + r.subject_id + ": empty from-state");
  if (r.to_state && *r.to_state == r.from_state) {
    throw ValidationError("subject " + r.subject_id + ": transition from state " + r.from_state + " to itself");
  }
  if (r.to_state && r.to_state->empty()) throw ValidationError("subject " + r.subject_id + ": empty to-state");
}

}  // namespace

TransitionKey TransitionKey::parse(std::string_view label) {
  const std::size_t pos = label.find('>');
  if (pos == std::string_view::npos || pos == 0 || pos + 1 == label.size()) {
    throw std::invalid_argument("transition label '" + std::string(label) + "' is not of the form from>to");
  }
  TransitionKey key{std::string(label.substr(0, pos)), std::string(label.substr(pos + 1))};
  if (key.from == key.to) throw std::invalid_argument("transition label '" + std::string(label) + "' is a self-loop");
  return key;
}

void CountingPath::validate() const {
  if (transition.from == transition.to) throw ValidationError("counting path: self-transition");
  if (jump_times.size() != jump_sizes.size() || jump_times.size() != at_risk.size()) {
    throw ValidationError("counting path " + transition.label() + ": array lengths differ");
  }
  if (n_subjects <= 0) throw ValidationError("counting path " + transition.label() + ": n_subjects must be positive");
  if (!(tau > 0.0)) throw ValidationError("counting path " + transition.label() + ": tau must be positive");
  for (std::size_t i = 0; i < jump_times.size(); ++i) {
    if (!(jump_times[i] >= 0.0 && jump_times[i] <= tau)) {
      throw ValidationError("counting path " + transition.label() + ": jump time outside [0, tau]");
    }
    if (i > 0 && !(jump_times[i] > jump_times[i - 1])) {
      throw ValidationError("counting path " + transition.label() + ": jump times not strictly increasing");
    }
    if (jump_sizes[i] < 1 || jump_sizes[i] > at_risk[i]) {
      throw ValidationError("counting path " + transition.label() + ": need 1 <= dN <= Y at every jump");
    }
  }
}

std::vector<SubjectRecord> parse_event_csv(std::istream& source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<SubjectRecord> records;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      static const std::vector<std::string_view> expected{"id", "from", "to", "entry", "exit"};
      if (fields != expected) throw ParseError(line_no, "expected header id,from,to,entry,exit");
      have_header = true;
      continue;
    }
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 fields, found " + std::to_string(fields.size()));
    }
    SubjectRecord r;
    r.subject_id = std::string(fields[0]);
    r.from_state = std::string(fields[1]);
    if (fields[2] != kCensoredToken) r.to_state = std::string(fields[2]);
    r.entry_time = parse_time(fields[3], line_no, "entry");
    r.exit_time = parse_time(fields[4], line_no, "exit");
    if (r.subject_id.empty()) throw ParseError(line_no, "empty subject id");
    check_record(r);
    records.push_back(std::move(r));
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "empty input: missing header");
  validate_records(records);
  return records;
}

void write_event_csv(std::ostream& out, const std::vector<SubjectRecord>& records) {
  out << "id,from,to,entry,exit\n";
  char buf[64];
  for (const auto& r : records) {
    out << r.subject_id << ',' << r.from_state << ',' << (r.to_state ? *r.to_state : std::string(kCensoredToken))
        << ',';
    auto res = std::to_chars(buf, buf + sizeof buf, r.entry_time);
    out.write(buf, res.ptr - buf);
    out << ',';
    res = std::to_chars(buf, buf + sizeof buf, r.exit_time);
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}

void validate_records(const std::vector<SubjectRecord>& records) {
  std::unordered_map<std::string, std::vector<const SubjectRecord*>> by_subject;
  for (const auto& r : records) {
    check_record(r);
    by_subject[r.subject_id].push_back(&r);
  }
  for (auto& [id, recs] : by_subject) {
    if (recs.size() < 2) continue;
    std::stable_sort(recs.begin(), recs.end(),
                     [](const SubjectRecord* a, const SubjectRecord* b) { return a->entry_time < b->entry_time; });
    for (std::size_t i = 1; i < recs.size(); ++i) {
      const SubjectRecord& prev = *recs[i - 1];
      const SubjectRecord& next = *recs[i];
      if (prev.censored()) {
        throw ValidationError("subject " + id + ": record after a censored record");
      }
      if (prev.exit_time != next.entry_time || *prev.to_state != next.from_state) {
        throw ValidationError("subject " + id + ": records do not form a connected path at time " +
                              std::to_string(prev.exit_time));
      }
    }
  }
}

std::set<TransitionKey> observed_transitions(const std::vector<SubjectRecord>& records) {
  std::set<TransitionKey> keys;
  for (const auto& r : records) {
    if (r.to_state) keys.insert({r.from_state, *r.to_state});
  }
  return keys;
}

int at_risk(const std::vector<SubjectRecord>& records, const std::string& state, double t) {
  int y = 0;
  for (const auto& r : records) {
    if (r.from_state == state && r.entry_time < t && t <= r.exit_time) ++y;
  }
  return y;
}

PathMap build_counting_paths(const std::vector<SubjectRecord>& records, double tau) {
  if (records.empty()) throw ValidationError("build_counting_paths: no records");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("build_counting_paths: tau must be positive");

  std::unordered_set<std::string> ids;
  struct StateTimes {
    std::vector<double> entries;
    std::vector<double> exits;
  };
  std::map<std::string, StateTimes> by_state;
  std::map<TransitionKey, std::vector<double>> events;
  for (const auto& r : records) {
    ids.insert(r.subject_id);
    auto& st = by_state[r.from_state];
    st.entries.push_back(r.entry_time);
    st.exits.push_back(r.exit_time);
    if (r.to_state && r.exit_time <= tau) events[{r.from_state, *r.to_state}].push_back(r.exit_time);
  }
  for (auto& [state, st] : by_state) {
    std::sort(st.entries.begin(), st.entries.end());
    std::sort(st.exits.begin(), st.exits.end());
  }

  const int n = static_cast<int>(ids.size());
  PathMap paths;
  for (auto& [key, times] : events) {
    std::sort(times.begin(), times.end());
    const StateTimes& st = by_state.at(key.from);
    CountingPath path;
    path.transition = key;
    path.n_subjects = n;
    path.tau = tau;
    for (std::size_t i = 0; i < times.size();) {
      std::size_t j = i;
      while (j < times.size() && times[j] == times[i]) ++j;
      const double t = times[i];
      // Y(t) = #{entry < t} - #{exit < t}, since entry < exit for every record.
      const auto entered = std::lower_bound(st.entries.begin(), st.entries.end(), t) - st.entries.begin();
      const auto left = std::lower_bound(st.exits.begin(), st.exits.end(), t) - st.exits.begin();
      path.jump_times.push_back(t);
      path.jump_sizes.push_back(static_cast<int>(j - i));
      path.at_risk.push_back(static_cast<int>(entered - left));
      i = j;
    }
    paths.emplace(key, std::move(path));
  }
  return paths;
}

}  // namespace hazardband
