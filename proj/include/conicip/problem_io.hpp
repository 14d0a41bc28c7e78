#pragma once

// Problem files are JSON documents:
//
//   { "n": 2, "m": 3,
//     "P": {"rowptr": [...], "colidx": [...], "values": [...]},
//     "A": {"rowptr": [...], "colidx": [...], "values": [...]},
//     "q": [...], "b": [...],
//     "cones": [{"type": "zero", "dim": 1}, {"type": "pow", "dim": 3, "alpha": 0.3},
//               {"type": "psd", "dim": 6, "side": 3}, ...],
//     "meta": {"name": "...", "seed": 0} }
//
// P is stored with both triangles. Numbers are written as the shortest
// decimal that round-trips, so read(write(p)) == p bit for bit.

#include "conicip/problem.hpp"
#include "conicip/solver.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace conicip {

struct ProblemMeta {
  std::string name;
  std::uint64_t seed = 0;

  friend bool operator==(const ProblemMeta&, const ProblemMeta&) = default;
};

struct ProblemFile {
  ProblemData problem;
  ProblemMeta meta;
};

/// Malformed JSON or a document that does not follow the schema. `pointer()`
/// is the JSON pointer of the offending value ("" for syntax errors).
class ParseError : public Error {
 public:
  ParseError(std::string pointer, const std::string& what)
      : Error(pointer.empty() ? what : pointer + ": " + what), pointer_(std::move(pointer)) {}
  [[nodiscard]] const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Parses and validates. Throws ParseError or ValidationError.
ProblemFile parse_problem(std::string_view text);
ProblemFile read_problem(const std::string& path);
std::string emit_problem(const ProblemFile& file, int indent = -1);
void write_problem(const std::string& path, const ProblemFile& file);

/// Machine-readable result object (status, objective values, vectors, timings).
std::string result_to_json(const SolveResult& result, int indent = 2);

}  // namespace conicip
