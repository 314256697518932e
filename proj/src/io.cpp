#include "symqmp/io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace symqmp {

namespace {

using ojson = nlohmann::ordered_json;

// The cache payload is raw memory; the format is pinned to the byte order of
// every platform this artifact targets.
static_assert(std::endian::native == std::endian::little,
              "constraint cache payload assumes a little-endian host");

[[noreturn]] void bad_input(const std::string& what) { throw std::invalid_argument(what); }

ojson parse_or_throw(const std::string& text, const char* what) {
  try {
    return ojson::parse(text);
  } catch (const std::exception& e) {
    bad_input(std::string(what) + ": parse error: " + e.what());
  }
}

double finite_or_throw(double x, const char* what) {
  if (!std::isfinite(x)) bad_input(std::string(what) + ": non-finite value has no JSON encoding");
  return x;
}

ojson complex_pair(cxd z, const char* what) {
  return ojson::array({finite_or_throw(std::real(z), what), finite_or_throw(std::imag(z), what)});
}

cxd read_complex(const ojson& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    bad_input(std::string(what) + ": expected a [re, im] number pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

int read_int(const ojson& j, const char* field, const char* what) {
  if (!j.contains(field) || !j[field].is_number_integer())
    bad_input(std::string(what) + ": missing or non-integer field '" + field + "'");
  return j[field].get<int>();
}

const ojson& read_array(const ojson& j, const char* field, const char* what) {
  if (!j.contains(field) || !j[field].is_array())
    bad_input(std::string(what) + ": missing or non-array field '" + field + "'");
  return j[field];
}

std::uint64_t fnv1a64(const char* data, std::size_t size) {
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

void append_raw(std::string& out, const void* p, std::size_t size) {
  out.append(static_cast<const char*>(p), size);
}

template <typename T>
T read_raw(const std::string& in, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > in.size())
    throw std::runtime_error("constraint cache truncated: " + path);
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

// --------------------------------------------------------------------------
// operators
// --------------------------------------------------------------------------

std::string operator_to_json(const SymmetricOperator& op) {
  const CxMat& m = op.matrix();
  ojson j;
  j["n"] = op.basis().n();
  j["d"] = op.basis().local_dim();
  j["order"] = "lex-desc";
  ojson entries = ojson::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int k = 0; k < m.cols(); ++k)
      entries.push_back(complex_pair(m(i, k), "operator_to_json"));
  j["entries"] = std::move(entries);
  return j.dump();
}

SymmetricOperator operator_from_json(const std::string& text) {
  ojson j = parse_or_throw(text, "operator_from_json");
  if (!j.is_object()) bad_input("operator_from_json: top level must be an object");
  int n = read_int(j, "n", "operator_from_json");
  int d = read_int(j, "d", "operator_from_json");
  if (n < 1 || d < 2) bad_input("operator_from_json: need n >= 1 and d >= 2");
  if (!j.contains("order") || !j["order"].is_string() || j["order"] != "lex-desc")
    bad_input("operator_from_json: basis order must be \"lex-desc\"");
  DickeBasis basis(n, d);
  int dim = basis.dim();
  const ojson& entries = read_array(j, "entries", "operator_from_json");
  if (entries.size() != static_cast<std::size_t>(dim) * dim)
    bad_input("operator_from_json: entry count does not match dim^2 for (n, d)");
  CxMat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k)
      m(i, k) = read_complex(entries[static_cast<std::size_t>(i) * dim + k], "operator_from_json");
  return SymmetricOperator(std::move(basis), std::move(m));
}

// --------------------------------------------------------------------------
// amplitudes
// --------------------------------------------------------------------------

std::string amplitudes_to_json(const DickeAmplitudes& amps) {
  if (amps.d.size() != amps.n + 1)
    bad_input("amplitudes_to_json: need n+1 amplitudes");
  ojson j;
  j["n"] = amps.n;
  ojson arr = ojson::array();
  for (int k = 0; k <= amps.n; ++k) arr.push_back(complex_pair(amps.d(k), "amplitudes_to_json"));
  j["amplitudes"] = std::move(arr);
  return j.dump();
}

DickeAmplitudes amplitudes_from_json(const std::string& text) {
  ojson j = parse_or_throw(text, "amplitudes_from_json");
  if (!j.is_object()) bad_input("amplitudes_from_json: top level must be an object");
  int n = read_int(j, "n", "amplitudes_from_json");
  if (n < 1) bad_input("amplitudes_from_json: need n >= 1");
  const ojson& arr = read_array(j, "amplitudes", "amplitudes_from_json");
  if (arr.size() != static_cast<std::size_t>(n) + 1)
    bad_input("amplitudes_from_json: need exactly n+1 amplitude pairs");
  DickeAmplitudes amps;
  amps.n = n;
  amps.d = CxVec(n + 1);
  for (int k = 0; k <= n; ++k)
    amps.d(k) = read_complex(arr[static_cast<std::size_t>(k)], "amplitudes_from_json");
  return amps;
}

// --------------------------------------------------------------------------
// diagonal matrix-product representations
// --------------------------------------------------------------------------

std::string mps_to_json(const TIDiagonalMPS& mps) {
  mps.validate();
  cxd y = mps.y();  // throws std::logic_error unless a0 is uniform
  int D = mps.bond_dim();
  ojson j;
  j["n"] = mps.n;
  j["D"] = D;
  j["y"] = complex_pair(y, "mps_to_json");
  ojson roots = ojson::array();
  for (int a = 0; a < D; ++a) {
    cxd r = mps.a1(a);
    if (mps.a1_lo.size() != 0) r += mps.a1_lo(a);
    roots.push_back(complex_pair(r, "mps_to_json"));
  }
  j["roots"] = std::move(roots);
  return j.dump();
}

TIDiagonalMPS mps_from_json(const std::string& text) {
  ojson j = parse_or_throw(text, "mps_from_json");
  if (!j.is_object()) bad_input("mps_from_json: top level must be an object");
  int n = read_int(j, "n", "mps_from_json");
  int D = read_int(j, "D", "mps_from_json");
  if (n < 1 || D < 1) bad_input("mps_from_json: need n >= 1 and D >= 1");
  if (!j.contains("y")) bad_input("mps_from_json: missing field 'y'");
  cxd y = read_complex(j["y"], "mps_from_json");
  const ojson& arr = read_array(j, "roots", "mps_from_json");
  if (arr.size() != static_cast<std::size_t>(D))
    bad_input("mps_from_json: root count must equal the bond dimension D");
  CxVec roots(D);
  for (int a = 0; a < D; ++a)
    roots(a) = read_complex(arr[static_cast<std::size_t>(a)], "mps_from_json");
  return TIDiagonalMPS::from_roots(n, y, std::move(roots));
}

std::string mps_dense_tensors_json(const TIDiagonalMPS& mps) {
  mps.validate();
  int D = mps.bond_dim();
  ojson j;
  j["n"] = mps.n;
  j["D"] = D;
  ojson tensors = ojson::array();
  for (int s = 0; s < 2; ++s) {
    ojson a = ojson::array();
    for (int r = 0; r < D; ++r)
      for (int c = 0; c < D; ++c) {
        cxd v(0.0, 0.0);
        if (r == c) {
          v = s == 0 ? mps.a0(r) : mps.a1(r);
          if (s == 1 && mps.a1_lo.size() != 0) v += mps.a1_lo(r);
        }
        a.push_back(complex_pair(v, "mps_dense_tensors_json"));
      }
    tensors.push_back(std::move(a));
  }
  j["tensors"] = std::move(tensors);
  return j.dump();
}

// --------------------------------------------------------------------------
// CSV numbers and metadata sidecars
// --------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string metadata_json(const RunMetadata& meta) {
  ojson j;
  j["version"] = meta.version;
  j["seed"] = meta.seed;
  ojson tol = ojson::object();
  for (const auto& [key, value] : meta.tolerances)
    tol[key] = finite_or_throw(value, "metadata_json");
  j["tolerances"] = std::move(tol);
  j["wall_seconds"] = finite_or_throw(meta.wall_seconds, "metadata_json");
  j["timestamp"] = meta.timestamp;
  ojson extra = ojson::object();
  for (const auto& [key, value] : meta.extra) extra[key] = value;
  j["extra"] = std::move(extra);
  return j.dump();
}

// --------------------------------------------------------------------------
// constraint cache
// --------------------------------------------------------------------------

std::string constraint_cache_filename(int n, int m, int d) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "constraints-n%d-m%d-d%d-v1.bin", n, m, d);
  return buf;
}

void save_constraint_cache(const std::string& path, const CompatibilityMap& map) {
  const auto& slots = map.all();
  std::uint64_t total = 0;
  for (const auto& slot : slots) total += slot.size();

  ojson header;
  header["n"] = map.n();
  header["m"] = map.m();
  header["d"] = map.local_dim();
  header["order"] = "lex-desc";
  header["version"] = 1;
  header["slots"] = slots.size();
  header["total_entries"] = total;

  std::string payload;
  payload.reserve(slots.size() * 8 + total * 16);
  for (const auto& slot : slots) {
    std::uint64_t count = slot.size();
    append_raw(payload, &count, sizeof count);
    for (const CompatEntry& e : slot) {
      std::int32_t row = e.row, col = e.col;
      append_raw(payload, &row, sizeof row);
      append_raw(payload, &col, sizeof col);
      append_raw(payload, &e.value, sizeof e.value);
    }
  }
  std::uint64_t checksum = fnv1a64(payload.data(), payload.size());

  std::string file = header.dump();
  file.push_back('\n');
  file += payload;
  append_raw(file, &checksum, sizeof checksum);
  write_text_file(path, file);
}

CompatibilityMap load_constraint_cache(const std::string& path) {
  std::string file = read_text_file(path);
  std::size_t nl = file.find('\n');
  if (nl == std::string::npos)
    throw std::runtime_error("constraint cache has no header line: " + path);
  ojson header;
  try {
    header = ojson::parse(file.substr(0, nl));
  } catch (const std::exception& e) {
    throw std::runtime_error("constraint cache header unreadable: " + path + ": " + e.what());
  }
  auto require_int = [&](const char* field) -> std::int64_t {
    if (!header.contains(field) || !header[field].is_number_integer())
      throw std::runtime_error(std::string("constraint cache header missing '") + field +
                               "': " + path);
    return header[field].get<std::int64_t>();
  };
  int n = static_cast<int>(require_int("n"));
  int m = static_cast<int>(require_int("m"));
  int d = static_cast<int>(require_int("d"));
  if (!header.contains("order") || header["order"] != "lex-desc")
    throw std::runtime_error("constraint cache has a foreign basis order: " + path);
  if (require_int("version") != 1)
    throw std::runtime_error("constraint cache has an unsupported version: " + path);
  std::uint64_t slots = static_cast<std::uint64_t>(require_int("slots"));
  std::uint64_t total = static_cast<std::uint64_t>(require_int("total_entries"));

  if (n < 1 || m < 1 || m > n || d < 2)
    throw std::runtime_error("constraint cache header out of range: " + path);
  DickeBasis bn(n, d), bm(m, d);
  std::uint64_t expect_slots = static_cast<std::uint64_t>(bm.dim()) * bm.dim();
  if (slots != expect_slots)
    throw std::runtime_error("constraint cache slot count mismatch: " + path);

  std::size_t payload_size = slots * 8 + total * 16;
  if (file.size() != nl + 1 + payload_size + 8)
    throw std::runtime_error("constraint cache truncated: " + path);
  std::uint64_t checksum = fnv1a64(file.data() + nl + 1, payload_size);
  std::uint64_t stored;
  std::memcpy(&stored, file.data() + nl + 1 + payload_size, sizeof stored);
  if (checksum != stored)
    throw std::runtime_error("constraint cache checksum mismatch: " + path);

  std::size_t pos = nl + 1;
  int dim = bn.dim();
  std::vector<std::vector<CompatEntry>> mats(slots);
  std::uint64_t seen = 0;
  for (std::uint64_t s = 0; s < slots; ++s) {
    std::uint64_t count = read_raw<std::uint64_t>(file, pos, path);
    seen += count;
    if (seen > total)
      throw std::runtime_error("constraint cache entry counts disagree with header: " + path);
    auto& slot = mats[s];
    slot.reserve(count);
    for (std::uint64_t e = 0; e < count; ++e) {
      std::int32_t row = read_raw<std::int32_t>(file, pos, path);
      std::int32_t col = read_raw<std::int32_t>(file, pos, path);
      double value = read_raw<double>(file, pos, path);
      if (row < 0 || row >= dim || col < 0 || col >= dim || !std::isfinite(value))
        throw std::runtime_error("constraint cache entry out of range: " + path);
      slot.push_back({row, col, value});
    }
  }
  if (seen != total)
    throw std::runtime_error("constraint cache entry counts disagree with header: " + path);
  return CompatibilityMap(n, m, d, std::move(mats));
}

CompatibilityMap cached_constraints(const std::string& cache_dir, int n, int m, int d,
                                    int threads) {
  if (cache_dir.empty()) return build_constraints(n, m, d, threads);
  namespace fs = std::filesystem;
  fs::path path = fs::path(cache_dir) / constraint_cache_filename(n, m, d);
  if (fs::exists(path)) {
    CompatibilityMap map = load_constraint_cache(path.string());
    if (map.n() != n || map.m() != m || map.local_dim() != d)
      throw std::runtime_error("constraint cache header disagrees with its filename: " +
                               path.string());
    return map;
  }
  CompatibilityMap map = build_constraints(n, m, d, threads);
  std::error_code ec;
  fs::create_directories(cache_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create cache directory: " + cache_dir + ": " + ec.message());
  save_constraint_cache(path.string(), map);
  return map;
}

// --------------------------------------------------------------------------
// sparse problem dumps
// --------------------------------------------------------------------------

std::string sdp_problem_dump(const SdpProblem& p) {
  std::string out = "# sparse sdp dump v1\n";
  out += "blocks " + std::to_string(p.block_dims.size());
  for (int dim : p.block_dims) out += " " + std::to_string(dim);
  out += "\nfree " + std::to_string(p.free_vars) + "\n";
  for (std::size_t b = 0; b < p.cost.size(); ++b)
    for (int i = 0; i < p.cost[b].rows(); ++i)
      for (int j = i; j < p.cost[b].cols(); ++j) {
        double v = p.cost[b](i, j);
        if (v == 0.0) continue;
        out += "cost " + std::to_string(b) + " " + std::to_string(i) + " " + std::to_string(j) +
               " " + format_double(v) + "\n";
      }
  for (std::size_t k = 0; k < p.constraints.size(); ++k)
    for (const SdpEntry& e : p.constraints[k]) {
      if (e.value == 0.0) continue;
      out += "con " + std::to_string(k) + " " + std::to_string(e.block) + " " +
             std::to_string(e.row) + " " + std::to_string(e.col) + " " + format_double(e.value) +
             "\n";
    }
  if (p.free_vars > 0) {
    for (int k = 0; k < p.free_coeffs.rows(); ++k)
      for (int v = 0; v < p.free_coeffs.cols(); ++v) {
        if (p.free_coeffs(k, v) == 0.0) continue;
        out += "freec " + std::to_string(k) + " " + std::to_string(v) + " " +
               format_double(p.free_coeffs(k, v)) + "\n";
      }
    for (int v = 0; v < p.free_cost.size(); ++v) {
      if (p.free_cost(v) == 0.0) continue;
      out += "freev " + std::to_string(v) + " " + format_double(p.free_cost(v)) + "\n";
    }
  }
  for (std::size_t k = 0; k < p.rhs.size(); ++k)
    out += "rhs " + std::to_string(k) + " " + format_double(p.rhs[k]) + "\n";
  return out;
}

// --------------------------------------------------------------------------
// files
// --------------------------------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed: " + path);
  return std::move(buf).str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot move file into place: " + path);
  }
}

}  // namespace symqmp
