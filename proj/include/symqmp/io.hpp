#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "symqmp/basis.hpp"
#include "symqmp/compat.hpp"
#include "symqmp/mps.hpp"
#include "symqmp/sdp.hpp"

namespace symqmp {

// Package version stamped into metadata sidecars and cache headers.
inline constexpr char kPackageVersion[] = "0.1.0";

// ---------------------------------------------------------------------------
// JSON formats.  All writers emit compact single-line JSON with a fixed field
// order, so identical inputs produce identical bytes; doubles are written in
// shortest-round-trip form and parse back bitwise.  All readers validate
// shapes and throw std::invalid_argument with a description on malformed
// input.  Non-finite values are rejected on write (JSON has no encoding for
// them).
// ---------------------------------------------------------------------------

// {"n":..,"d":..,"order":"lex-desc","entries":[[re,im],...]} with entries
// row-major over the fixed basis order.  The reader symmetrizes on ingest
// (the SymmetricOperator constructor records the pre-symmetrization defect).
std::string operator_to_json(const SymmetricOperator& op);
SymmetricOperator operator_from_json(const std::string& text);

// {"n":..,"amplitudes":[[re,im],...]} with n+1 weight amplitudes.
std::string amplitudes_to_json(const DickeAmplitudes& amps);
DickeAmplitudes amplitudes_from_json(const std::string& text);

// {"n":..,"D":..,"y":[re,im],"roots":[[re,im],...]} — the canonical uniform
// A_0 = y*I diagonal form.  Writing a representation with a non-uniform a0
// throws std::logic_error; compensated low words (a1_lo) are folded into the
// serialized roots, so reading back yields plain double roots.
std::string mps_to_json(const TIDiagonalMPS& mps);
TIDiagonalMPS mps_from_json(const std::string& text);

// Dense site tensors for external tensor-network tools:
// {"n":..,"D":..,"tensors":[A0,A1]} where each A_s is a D x D row-major
// complex matrix [[re,im],...] with the diagonal representation embedded.
// Works for any diagonal representation, uniform a0 or not.
std::string mps_dense_tensors_json(const TIDiagonalMPS& mps);

// ---------------------------------------------------------------------------
// CSV support.  Numbers are printed with '.' as the decimal separator and 17
// significant digits, enough for a lossless text round trip.
// ---------------------------------------------------------------------------
std::string format_double(double x);

// Sidecar written next to every artifact: run provenance plus wall time.
// The timestamp lives only here so artifact bytes stay reproducible.
struct RunMetadata {
  std::string version = kPackageVersion;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;  // e.g. {"tol_gap", 1e-9}
  double wall_seconds = 0.0;
  std::string timestamp;                      // ISO-8601; empty allowed
  std::map<std::string, std::string> extra;   // free-form run parameters
};
std::string metadata_json(const RunMetadata& meta);

// ---------------------------------------------------------------------------
// Constraint cache.  One file per (n, m, d): a single-line JSON header
// {"n","m","d","order","version","slots","total_entries"} followed by a raw
// little-endian payload (per slot: uint64 count, then count records of
// int32 row, int32 col, float64 value) and a trailing FNV-1a checksum.
// Files are byte-deterministic for a given map.
// ---------------------------------------------------------------------------
std::string constraint_cache_filename(int n, int m, int d);
void save_constraint_cache(const std::string& path, const CompatibilityMap& map);
// Throws std::runtime_error naming the path on any mismatch or corruption.
CompatibilityMap load_constraint_cache(const std::string& path);
// Load from cache_dir when a valid file is present; otherwise build (with the
// given thread count) and, when cache_dir is nonempty, save for next time.
CompatibilityMap cached_constraints(const std::string& cache_dir, int n, int m, int d,
                                    int threads = 0);

// ---------------------------------------------------------------------------
// Sparse problem dump for cross-checking against external solvers.  Plain
// text, one line per nonzero:
//   blocks <count> <dim>...        cone structure
//   free <count>                   number of unconstrained scalars
//   cost <block> <i> <j> <value>   upper-triangle cost nonzeros
//   con <k> <block> <i> <j> <value>   constraint-k nonzeros
//   freec <k> <var> <value>        free-variable column in constraint k
//   freev <var> <value>            free-variable cost
//   rhs <k> <value>                right-hand sides (all rows, zeros included)
// ---------------------------------------------------------------------------
std::string sdp_problem_dump(const SdpProblem& p);

// ---------------------------------------------------------------------------
// File helpers.  Binary-safe; errors throw std::runtime_error naming the
// path.  Writes go through a temporary file renamed into place, so readers
// never observe a half-written artifact.
// ---------------------------------------------------------------------------
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace symqmp
