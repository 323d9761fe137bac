#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hazardband {

/// Token in the `to` column marking a right-censored record.
inline constexpr std::string_view kCensoredToken = "cens";

/// Malformed input, with the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that breaks a data invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TransitionKey {
  std::string from;
  std::string to;

  auto operator<=>(const TransitionKey&) const = default;

  /// "from>to", the key used in JSON output.
  std::string label() const { return from + ">" + to; }
  static TransitionKey parse(std::string_view label);
};

/// One sojourn of one subject in `from_state`, observed on (entry_time, exit_time].
/// An empty `to_state` means the sojourn ended in right-censoring.
struct SubjectRecord {
  std::string subject_id;
  double entry_time = 0.0;
  double exit_time = 0.0;
  std::string from_state;
  std::optional<std::string> to_state;

  bool censored() const { return !to_state.has_value(); }
  bool operator==(const SubjectRecord&) const = default;
};

/// Aggregated counting process N and at-risk process Y of one transition,
/// stored at the jump times of N only.
struct CountingPath {
  TransitionKey transition;
  std::vector<double> jump_times;
  std::vector<int> jump_sizes;  // dN at each jump time
  std::vector<int> at_risk;     // Y(t), left-continuous
  int n_subjects = 0;
  double tau = 0.0;

  std::size_t size() const { return jump_times.size(); }
  /// Throws ValidationError if any structural invariant fails.
  void validate() const;
  bool operator==(const CountingPath&) const = default;
};

using PathMap = std::map<TransitionKey, CountingPath>;

/// Reads `id,from,to,entry,exit` CSV (header required, `to` may be "cens").
std::vector<SubjectRecord> parse_event_csv(std::istream& source);

void write_event_csv(std::ostream& out, const std::vector<SubjectRecord>& records);

/// Checks per-record invariants and per-subject path connectivity.
void validate_records(const std::vector<SubjectRecord>& records);

/// Counting and at-risk processes for every transition with a jump in (0, tau].
PathMap build_counting_paths(const std::vector<SubjectRecord>& records, double tau);

/// Every transition appearing in the data, regardless of time.
std::set<TransitionKey> observed_transitions(const std::vector<SubjectRecord>& records);

/// Y(t) for a state: records in `state` with entry_time < t <= exit_time.
int at_risk(const std::vector<SubjectRecord>& records, const std::string& state, double t);

}  // namespace hazardband
