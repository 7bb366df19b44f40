#include "hermexp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "hermexp/expansion_engine.hpp"
#include "hermexp/hermite.hpp"
#include "hermexp/operator_models.hpp"
#include "hermexp/quadrature.hpp"
#include "hermexp/scalar_expansions.hpp"

namespace hermexp {

namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// all randomness an experiment may use flows through one engine seeded by
// (config seed XOR hash of the experiment id), so results do not depend on
// scheduling or on the other experiments in the config
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}

  double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::complex<double> cnormal() {
    const double u1 = unit(), u2 = unit();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }
};

// ---------------------------------------------------------------------------
// report rows

// abs_err and rel_err are descriptive; pass is decided by the caller from the
// tolerances echoed inside params
ReportRow make_row(const std::string& id, json params, double value,
                   double reference, bool pass) {
  ReportRow r;
  r.experiment_id = id;
  r.param_json = params.dump();
  r.value = value;
  r.reference = reference;
  r.abs_err = std::abs(value - reference);
  r.rel_err = (reference != 0.0) ? r.abs_err / std::abs(reference) : r.abs_err;
  r.pass = pass;
  r.runtime_ms = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// config validation helpers; every check appends to the shared violation list

class Check {
 public:
  Check(const json& e, std::string where, std::vector<std::string>& errs)
      : e_(e), where_(std::move(where)), errs_(errs) {}

  void fail(const std::string& msg) const { errs_.push_back(where_ + ": " + msg); }

  const json* child(const char* key, bool required, json::value_t type,
                    const char* type_name) const {
    if (!e_.contains(key)) {
      if (required) fail(std::string("missing required ") + type_name + " '" + key + "'");
      return nullptr;
    }
    const json& c = e_[key];
    const bool ok = (type == json::value_t::array) ? c.is_array() : c.is_object();
    if (!ok) {
      fail(std::string("'") + key + "' must be " + (type == json::value_t::array
                                                        ? "an array"
                                                        : "an object"));
      return nullptr;
    }
    return &c;
  }
  const json* obj(const char* key, bool required) const {
    return child(key, required, json::value_t::object, "object");
  }
  const json* arr(const char* key, bool required) const {
    return child(key, required, json::value_t::array, "array");
  }

  bool num(const char* key, bool required, double* out = nullptr) const {
    if (!e_.contains(key)) {
      if (required) fail(std::string("missing required number '") + key + "'");
      return false;
    }
    if (!e_[key].is_number()) {
      fail(std::string("'") + key + "' must be a number");
      return false;
    }
    if (out) *out = e_[key].get<double>();
    return true;
  }

  bool pos(const char* key, bool required, double* out = nullptr) const {
    double v;
    if (!num(key, required, &v)) return false;
    if (!(v > 0.0)) {
      fail(std::string("'") + key + "' must be > 0");
      return false;
    }
    if (out) *out = v;
    return true;
  }

  bool nonneg(const char* key, bool required, double* out = nullptr) const {
    double v;
    if (!num(key, required, &v)) return false;
    if (!(v >= 0.0)) {
      fail(std::string("'") + key + "' must be >= 0");
      return false;
    }
    if (out) *out = v;
    return true;
  }

  bool intval(const char* key, bool required, long lo, long hi,
              long* out = nullptr) const {
    if (!e_.contains(key)) {
      if (required) fail(std::string("missing required integer '") + key + "'");
      return false;
    }
    if (!e_[key].is_number_integer() && !e_[key].is_number_unsigned()) {
      fail(std::string("'") + key + "' must be an integer");
      return false;
    }
    const long v = e_[key].get<long>();
    if (v < lo || v > hi) {
      fail(std::string("'") + key + "' must lie in [" + std::to_string(lo) + ", " +
           std::to_string(hi) + "]");
      return false;
    }
    if (out) *out = v;
    return true;
  }

  bool str_in(const char* key, bool required,
              std::initializer_list<const char*> allowed,
              std::string* out = nullptr) const {
    if (!e_.contains(key)) {
      if (required) fail(std::string("missing required string '") + key + "'");
      return false;
    }
    if (!e_[key].is_string()) {
      fail(std::string("'") + key + "' must be a string");
      return false;
    }
    const std::string v = e_[key].get<std::string>();
    for (const char* a : allowed) {
      if (v == a) {
        if (out) *out = v;
        return true;
      }
    }
    std::string msg = std::string("'") + key + "' must be one of {";
    bool first = true;
    for (const char* a : allowed) {
      if (!first) msg += ", ";
      msg += a;
      first = false;
    }
    fail(msg + "}");
    return false;
  }

  bool num_array(const char* key, bool required, size_t min_len) const {
    const json* a = arr(key, required);
    if (!a) return false;
    if (a->size() < min_len) {
      fail(std::string("'") + key + "' needs at least " + std::to_string(min_len) +
           " entries");
      return false;
    }
    for (const auto& v : *a) {
      if (!v.is_number()) {
        fail(std::string("'") + key + "' must contain only numbers");
        return false;
      }
    }
    return true;
  }

  const json& raw() const { return e_; }
  const std::string& where() const { return where_; }
  std::vector<std::string>& errs() const { return errs_; }

 private:
  const json& e_;
  std::string where_;
  std::vector<std::string>& errs_;
};

bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

// parsed shape facts the data/check validators need
struct ModelShape {
  std::string type;
  int dim = 0;
  bool grid = false;
  bool valid = false;
};

bool parse_complex_entry(const json& v, std::complex<double>* out) {
  if (v.is_number()) {
    *out = std::complex<double>(v.get<double>(), 0.0);
    return true;
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    *out = std::complex<double>(v[0].get<double>(), v[1].get<double>());
    return true;
  }
  return false;
}

ModelShape validate_model(const json& m, const std::string& where,
                          std::vector<std::string>& errs, bool& uses_rng) {
  ModelShape shape;
  Check c(m, where, errs);
  if (!c.str_in("type", true,
                {"diagonal_group", "diagonal_cosine", "shift_group",
                 "matrix_group", "block_cosine_lift"},
                &shape.type))
    return shape;

  if (shape.type == "diagonal_group" || shape.type == "diagonal_cosine" ||
      shape.type == "block_cosine_lift") {
    const char* key = (shape.type == "diagonal_group") ? "q" : "omega";
    if (m.contains(key)) {
      if (!c.num_array(key, true, 1)) return shape;
      shape.dim = static_cast<int>(m[key].size());
      if (shape.type != "diagonal_group") {
        for (const auto& v : m[key]) {
          if (!(v.get<double>() > 0.0)) {
            c.fail(std::string("'") + key + "' entries must be > 0");
            return shape;
          }
        }
      }
    } else {
      long k;
      if (!c.intval("size", true, 1, 10000, &k)) return shape;
      c.str_in("spectrum", false, {"linear"});
      shape.dim = static_cast<int>(k);
    }
    if (shape.type == "block_cosine_lift") shape.dim *= 2;
    shape.valid = true;
    return shape;
  }

  if (shape.type == "shift_group") {
    long pts;
    bool ok = c.pos("half_width", true);
    if (!c.intval("points", true, 8, 1 << 20, &pts)) return shape;
    if (!is_power_of_two(pts)) {
      c.fail("'points' must be a power of two");
      return shape;
    }
    if (!ok) return shape;
    shape.dim = static_cast<int>(pts);
    shape.grid = true;
    shape.valid = true;
    return shape;
  }

  // matrix_group: explicit entries or a seeded random skew-Hermitian draw
  if (m.contains("matrix")) {
    const json* rows = c.arr("matrix", true);
    if (!rows || rows->empty()) {
      c.fail("'matrix' must be a nonempty array of rows");
      return shape;
    }
    const size_t n = rows->size();
    Eigen::MatrixXcd a(n, n);
    for (size_t i = 0; i < n; ++i) {
      const json& row = (*rows)[i];
      if (!row.is_array() || row.size() != n) {
        c.fail("'matrix' must be square");
        return shape;
      }
      for (size_t j = 0; j < n; ++j) {
        std::complex<double> v;
        if (!parse_complex_entry(row[j], &v)) {
          c.fail("'matrix' entries must be numbers or [re, im] pairs");
          return shape;
        }
        a(i, j) = v;
      }
    }
    const double scale = a.cwiseAbs().maxCoeff();
    if ((a + a.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
      c.fail("'matrix' must be skew-Hermitian");
      return shape;
    }
    shape.dim = static_cast<int>(n);
    shape.valid = true;
    return shape;
  }
  long d;
  if (!c.intval("dim", true, 1, 512, &d)) return shape;
  c.pos("scale", false);
  uses_rng = true;
  shape.dim = static_cast<int>(d);
  shape.valid = true;
  return shape;
}

void validate_data(const json& d, const std::string& where,
                   std::vector<std::string>& errs, const ModelShape& shape,
                   bool& uses_rng) {
  Check c(d, where, errs);
  std::string formula;
  if (!c.str_in("formula", true,
                {"power", "geometric", "random", "gaussian", "values"}, &formula))
    return;
  if (formula == "power") {
    c.num("s", true);
    if (shape.grid) c.fail("'power' data needs a coordinate model");
  } else if (formula == "geometric") {
    double r;
    if (c.num("ratio", true, &r) && r == 0.0) c.fail("'ratio' must be nonzero");
    if (shape.grid) c.fail("'geometric' data needs a coordinate model");
  } else if (formula == "random") {
    uses_rng = true;
  } else if (formula == "gaussian") {
    if (!shape.grid) c.fail("'gaussian' data needs a grid model");
    c.num("center", false);
    c.pos("width", false);
    c.num("amplitude", false);
  } else {  // values
    const json* a = c.arr("values", true);
    if (!a) return;
    if (shape.valid && static_cast<int>(a->size()) != shape.dim) {
      c.fail("'values' length must equal the model dimension " +
             std::to_string(shape.dim));
      return;
    }
    for (const auto& v : *a) {
      std::complex<double> z;
      if (!parse_complex_entry(v, &z)) {
        c.fail("'values' entries must be numbers or [re, im] pairs");
        return;
      }
    }
  }
}

// which expansion families each model type supports (evolution + coefficients)
bool family_supported(const std::string& model_type, const std::string& family) {
  if (model_type == "diagonal_group" || model_type == "matrix_group") return true;
  if (model_type == "diagonal_cosine") return family == "cosine" || family == "sine";
  return family == "group";  // shift_group, block_cosine_lift
}

std::string default_family(const std::string& model_type) {
  return model_type == "diagonal_cosine" ? "cosine" : "group";
}

bool check_degrees(const Check& c, const char* key, size_t min_len) {
  const json* a = c.arr(key, true);
  if (!a) return false;
  if (a->size() < min_len) {
    c.fail(std::string("'") + key + "' needs at least " + std::to_string(min_len) +
           " entries");
    return false;
  }
  long prev = -1;
  for (const auto& v : *a) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      c.fail(std::string("'") + key + "' must contain integers");
      return false;
    }
    const long m = v.get<long>();
    if (m < 0 || m > 1800) {
      c.fail(std::string("'") + key + "' entries must lie in [0, 1800]");
      return false;
    }
    if (m <= prev) {
      c.fail(std::string("'") + key + "' must be strictly increasing");
      return false;
    }
    prev = m;
  }
  return true;
}

void validate_expand(const Check& c, const ModelShape& shape) {
  c.num_array("t", true, 1);
  check_degrees(c, "degrees", 1);
  c.str_in("norm", false, {"l2", "linf"});
  c.pos("tol", true);
  const json* checks = c.obj("checks", false);
  if (!checks) return;
  const std::string cw = c.where() + ".checks";
  if (checks->contains("coeff_agreement")) {
    Check k((*checks)["coeff_agreement"], cw + ".coeff_agreement", c.errs());
    k.intval("n_max", true, 0, 400);
    k.intval("states", true, 1, 64);
    k.pos("tol", true);
  }
  if (checks->contains("norm_growth")) {
    Check k((*checks)["norm_growth"], cw + ".norm_growth", c.errs());
    k.intval("n_max", true, 1, 2000);
    k.nonneg("grace", true);
    if (shape.type == "diagonal_cosine" || shape.type == "block_cosine_lift")
      k.fail("norm_growth needs a unitary group model");
  }
  if (checks->contains("parity_split")) {
    Check k((*checks)["parity_split"], cw + ".parity_split", c.errs());
    k.intval("m", true, 1, 800);
    k.pos("tol", true);
    if (shape.type != "diagonal_group")
      k.fail("parity_split needs a diagonal_group model");
  }
  if (checks->contains("block_structure")) {
    Check k((*checks)["block_structure"], cw + ".block_structure", c.errs());
    k.intval("n_max", true, 0, 200);
    k.pos("tol", true);
    if (shape.type != "block_cosine_lift")
      k.fail("block_structure needs a block_cosine_lift model");
  }
  if (checks->contains("sharpness")) {
    Check k((*checks)["sharpness"], cw + ".sharpness", c.errs());
    long lo = 0, hi = 0;
    k.intval("n_lo", true, 1, 200, &lo);
    k.intval("n_hi", true, 1, 200, &hi);
    if (lo && hi && hi <= lo) k.fail("'n_hi' must exceed 'n_lo'");
    double f;
    if (k.pos("factor", true, &f) && f <= 1.0) k.fail("'factor' must exceed 1");
    if (shape.type != "diagonal_cosine")
      k.fail("sharpness needs a diagonal_cosine model");
  }
}

void validate_rates(const Check& c, const ModelShape& shape,
                    const std::string& family) {
  c.num("t", true);
  long drop = 1;
  c.intval("drop", false, 0, 16, &drop);
  const json* a = c.raw().contains("degrees") ? &c.raw()["degrees"] : nullptr;
  if (check_degrees(c, "degrees", 1) && a &&
      static_cast<long>(a->size()) < drop + 4)
    c.fail("'degrees' needs at least drop + 4 entries for the fit");
  c.str_in("norm", false, {"l2", "linf"});
  c.num("reference_slope", true);
  c.nonneg("margin", true);
  if (c.raw().contains("plot") && !c.raw()["plot"].is_boolean())
    c.fail("'plot' must be a boolean");
  const json* bc = c.obj("bound_check", false);
  if (bc) {
    Check k(*bc, c.where() + ".bound_check", c.errs());
    long p = 0, lo = 0, fit = 0, hi = 0;
    k.intval("p", true, 0, 60, &p);
    k.intval("n_lo", true, 0, 2000, &lo);
    k.intval("n_fit_hi", true, 0, 2000, &fit);
    k.intval("n_hi", true, 0, 2000, &hi);
    if (!(p <= lo && lo <= fit && fit < hi))
      k.fail("required: p <= n_lo <= n_fit_hi < n_hi");
    if (shape.grid || shape.type == "block_cosine_lift")
      k.fail("bound_check needs a diagonal or matrix model");
    (void)family;
  }
}

void validate_grid_spec(const Check& parent, const char* key, double def_lo,
                        double def_hi) {
  const json* g = parent.obj(key, false);
  if (!g) return;
  Check k(*g, parent.where() + "." + key, parent.errs());
  double lo = def_lo, hi = def_hi;
  k.num("lo", false, &lo);
  k.num("hi", false, &hi);
  if (!(lo < hi)) k.fail("'lo' must be < 'hi'");
  k.intval("points", false, 2, 20001);
}

void validate_kernels(const Check& c) {
  validate_grid_spec(c, "t_grid", -10.0, 10.0);
  int suites = 0;
  if (const json* s = c.obj("h_recurrence", false)) {
    Check k(*s, c.where() + ".h_recurrence", c.errs());
    k.intval("n_max", false, 1, 4000);
    k.pos("tol", true);
    ++suites;
  }
  if (const json* s = c.obj("kernel_recurrence", false)) {
    Check k(*s, c.where() + ".kernel_recurrence", c.errs());
    k.intval("n_max", false, 1, 2000);
    k.pos("tol", true);
    ++suites;
  }
  if (const json* s = c.obj("ode", false)) {
    Check k(*s, c.where() + ".ode", c.errs());
    k.intval("n_max", false, 1, 2000);
    k.pos("tol", true);
    ++suites;
  }
  if (const json* s = c.obj("deriv_fd", false)) {
    Check k(*s, c.where() + ".deriv_fd", c.errs());
    k.pos("tol", true);
    k.pos("step1", false);
    k.pos("step2", false);
    if (s->contains("n_list")) k.num_array("n_list", true, 1);
    if (s->contains("t_list")) k.num_array("t_list", true, 1);
    ++suites;
  }
  if (const json* s = c.obj("zeros", false)) {
    Check k(*s, c.where() + ".zeros", c.errs());
    k.pos("tol", true);
    k.nonneg("symmetry_tol", true);
    if (s->contains("n_list")) k.num_array("n_list", true, 1);
    ++suites;
  }
  if (const json* s = c.obj("parity", false)) {
    Check k(*s, c.where() + ".parity", c.errs());
    k.intval("n_max", false, 1, 2000);
    k.nonneg("tol", true);
    ++suites;
  }
  if (const json* s = c.obj("ortho_bound", false)) {
    Check k(*s, c.where() + ".ortho_bound", c.errs());
    k.intval("n_max", false, 1, 2000);
    k.pos("bound", true);
    validate_grid_spec(k, "grid", -35.0, 35.0);
    ++suites;
  }
  if (const json* s = c.obj("muckenhoupt", false)) {
    Check k(*s, c.where() + ".muckenhoupt", c.errs());
    long lo = 0, hi = 0;
    k.intval("n_lo", true, 1, 2000, &lo);
    k.intval("n_hi", true, 1, 2000, &hi);
    if (lo && hi && hi < lo) k.fail("'n_hi' must be >= 'n_lo'");
    ++suites;
  }
  if (const json* arr = c.arr("scalar_kernels", false)) {
    for (size_t i = 0; i < arr->size(); ++i) {
      Check k((*arr)[i], c.where() + ".scalar_kernels[" + std::to_string(i) + "]",
              c.errs());
      k.str_in("family", true, {"dirichlet", "fejer"});
      k.num("s", true);
      k.num("t", true);
      k.intval("terms", true, 1, 400);
      k.pos("tol", true);
    }
    ++suites;
  }
  if (suites == 0) c.fail("kernels experiment enables no suite");
}

void validate_norms(const Check& c) {
  int suites = 0;
  if (const json* s = c.obj("l1_bound", false)) {
    Check k(*s, c.where() + ".l1_bound", c.errs());
    k.intval("n_max", false, 0, 260);
    k.nonneg("grace", true);
    ++suites;
  }
  if (const json* s = c.obj("chain", false)) {
    Check k(*s, c.where() + ".chain", c.errs());
    k.intval("n_max", false, 1, 200);
    k.pos("tol", true);
    k.nonneg("bound_grace", true);
    ++suites;
  }
  if (suites == 0) c.fail("norms experiment enables no suite");
}

void validate_holo(const Check& c, const ModelShape& shape, bool& uses_rng) {
  if (shape.valid && shape.type != "diagonal_group" &&
      shape.type != "diagonal_cosine" && shape.type != "matrix_group")
    c.fail("holo needs a diagonal or matrix model");
  c.intval("m", true, 0, 800);
  c.pos("tol", true);
  bool any_z = false;
  if (const json* zs = c.arr("z", false)) {
    any_z = !zs->empty();
    for (size_t i = 0; i < zs->size(); ++i) {
      std::complex<double> z;
      if (!parse_complex_entry((*zs)[i], &z)) {
        c.fail("'z' entries must be numbers or [re, im] pairs");
        return;
      }
      if (!(std::abs(z - std::complex<double>(0.25, 0.0)) < 0.25)) {
        c.fail("'z' entries must lie in the open disk |z - 1/4| < 1/4");
        return;
      }
    }
  }
  if (const json* s = c.obj("z_sample", false)) {
    Check k(*s, c.where() + ".z_sample", c.errs());
    long count = 0;
    k.intval("count", true, 1, 256, &count);
    double rf;
    if (k.pos("radius_frac", true, &rf) && rf >= 1.0)
      k.fail("'radius_frac' must be < 1");
    uses_rng = true;
    any_z = any_z || count > 0;
  }
  if (!any_z) c.fail("holo needs 'z' points or a 'z_sample' block");
  if (const json* q = c.obj("quarter", false)) {
    Check k(*q, c.where() + ".quarter", c.errs());
    k.intval("m", true, 0, 800);
    k.nonneg("tol", true);
  }
}

void validate_fejer(const Check& c, const ModelShape& shape) {
  if (shape.valid && shape.type != "diagonal_group" &&
      shape.type != "diagonal_cosine" && shape.type != "matrix_group")
    c.fail("fejer needs a diagonal or matrix model");
  if (shape.type == "matrix_group")
    ;  // group kind; fejer_family_direct integrates the group evolution
  c.num_array("t", true, 1);
  c.intval("terms", true, 1, 600);
  c.pos("tol", true);
  c.pos("direct_tol", true);
  if (const json* s = c.obj("scalar_coeffs", false)) {
    Check k(*s, c.where() + ".scalar_coeffs", c.errs());
    k.num_array("s_list", true, 1);
    k.intval("n_max", true, 1, 120);
    k.pos("tol", true);
  }
  if (const json* s = c.obj("l1_norms", false)) {
    Check k(*s, c.where() + ".l1_norms", c.errs());
    k.intval("n_max", true, 1, 60);
    k.pos("tol", true);
  }
  if (const json* s = c.obj("derivative_relation", false)) {
    Check k(*s, c.where() + ".derivative_relation", c.errs());
    k.num_array("s_list", true, 1);
    k.intval("n_max", true, 1, 120);
    k.pos("tol", true);
  }
  if (const json* s = c.obj("term_decay", false)) {
    Check k(*s, c.where() + ".term_decay", c.errs());
    k.num("t", true);
    long lo = 0, hi = 0;
    k.intval("n_lo", true, 1, 400, &lo);
    k.intval("n_hi", true, 1, 400, &hi);
    if (lo && hi && hi < lo + 4) k.fail("'n_hi' must be >= 'n_lo' + 4");
    k.num("reference_slope", true);
    k.nonneg("margin", true);
  }
}

void validate_laguerre(const Check& c, const ModelShape& shape) {
  if (shape.valid && shape.type != "diagonal_group" && shape.type != "matrix_group")
    c.fail("laguerre-compare needs a diagonal_group or matrix_group model");
  c.pos("t", true);
  c.intval("m", true, 1, 1000);
  double alpha;
  if (c.num("alpha", false, &alpha) && !(alpha > -1.0))
    c.fail("'alpha' must exceed -1");
  c.pos("tol_hermite", true);
  c.pos("tol_laguerre", true);
  c.pos("ratio_max", true);
}

const std::vector<std::string> kKinds = {
    "expand", "rates", "kernels", "norms", "holo", "fejer", "laguerre-compare"};

void validate_experiment(const json& e, size_t idx, std::vector<std::string>& errs,
                         bool& uses_rng, std::vector<std::string>& ids) {
  std::string where = "experiments[" + std::to_string(idx) + "]";
  if (!e.is_object()) {
    errs.push_back(where + ": must be an object");
    return;
  }
  Check c(e, where, errs);
  std::string id;
  if (c.raw().contains("id") && c.raw()["id"].is_string()) {
    id = c.raw()["id"].get<std::string>();
    const bool ok_chars =
        !id.empty() && id.size() <= 64 &&
        id.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") ==
            std::string::npos;
    if (!ok_chars) {
      c.fail("'id' must be 1-64 characters from [A-Za-z0-9_.-]");
    } else if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
      c.fail("duplicate id '" + id + "'");
    } else {
      ids.push_back(id);
      where += " (id '" + id + "')";
    }
  } else {
    c.fail("missing required string 'id'");
  }
  Check cc(e, where, errs);

  std::string kind;
  if (!cc.str_in("kind", true,
                 {"expand", "rates", "kernels", "norms", "holo", "fejer",
                  "laguerre-compare"},
                 &kind)) {
    if (e.contains("kind") && e["kind"].is_string() &&
        e["kind"].get<std::string>() == "verify-all")
      errs.push_back(where +
                     ": 'verify-all' is a CLI subcommand, not an experiment kind");
    return;
  }

  const bool needs_model = kind == "expand" || kind == "rates" || kind == "holo" ||
                           kind == "fejer" || kind == "laguerre-compare";
  ModelShape shape;
  if (needs_model) {
    const json* m = cc.obj("model", true);
    if (m) shape = validate_model(*m, where + ".model", errs, uses_rng);
    const json* d = cc.obj("data", true);
    if (d && shape.valid) validate_data(*d, where + ".data", errs, shape, uses_rng);

    std::string family = default_family(shape.type);
    if (e.contains("family")) {
      if (cc.str_in("family", false, {"group", "cosine", "sine"}, &family) &&
          shape.valid && !family_supported(shape.type, family))
        cc.fail("family '" + family + "' is not supported by model type '" +
                shape.type + "'");
    }
    if (kind == "expand") validate_expand(cc, shape);
    if (kind == "rates") validate_rates(cc, shape, family);
    if (kind == "holo") {
      if (e.contains("family"))
        cc.fail("holo derives the family from the model; drop 'family'");
      validate_holo(cc, shape, uses_rng);
    }
    if (kind == "fejer") {
      if (e.contains("family"))
        cc.fail("fejer derives the family from the model; drop 'family'");
      validate_fejer(cc, shape);
    }
    if (kind == "laguerre-compare") validate_laguerre(cc, shape);
  } else {
    if (kind == "kernels") validate_kernels(cc);
    if (kind == "norms") validate_norms(cc);
  }
}

// ---------------------------------------------------------------------------
// building models and states from validated specs

Eigen::VectorXd spec_frequencies(const json& m, const char* key) {
  if (m.contains(key)) {
    const auto v = m[key].get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  }
  const int k = m["size"].get<int>();
  Eigen::VectorXd out(k);
  for (int i = 0; i < k; ++i) out[i] = i + 1.0;
  return out;
}

OperatorModel build_model(const json& m, Rng& rng) {
  const std::string type = m["type"].get<std::string>();
  if (type == "diagonal_group") return DiagonalGroup{spec_frequencies(m, "q")};
  if (type == "diagonal_cosine")
    return make_diagonal_cosine(spec_frequencies(m, "omega"));
  if (type == "block_cosine_lift")
    return BlockCosineLift{make_diagonal_cosine(spec_frequencies(m, "omega"))};
  if (type == "shift_group")
    return make_shift_group(m["half_width"].get<double>(), m["points"].get<int>());
  // matrix_group
  if (m.contains("matrix")) {
    const json& rows = m["matrix"];
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::complex<double> v;
        parse_complex_entry(rows[i][j], &v);
        a(i, j) = v;
      }
    return make_matrix_group(a);
  }
  const int d = m["dim"].get<int>();
  const double scale = m.value("scale", 1.0);
  Eigen::MatrixXcd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = scale * rng.cnormal();
  return make_matrix_group(0.5 * (g - g.adjoint()).eval());
}

StateVector random_grid_state(const GridSpec& grid, Rng& rng) {
  // a small mixture of smooth bumps; widths stay >= 0.8 so the profile is
  // band-limited well inside the grid's resolvable frequencies
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid.points);
  for (int b = 0; b < 3; ++b) {
    const double center = rng.uniform(-4.0, 4.0);
    const double width = rng.uniform(0.8, 1.6);
    const std::complex<double> amp = rng.cnormal();
    for (int j = 0; j < grid.points; ++j) {
      const double s = grid.node(j) - center;
      v[j] += amp * std::exp(-0.5 * s * s / (width * width));
    }
  }
  return StateVector::on(grid, std::move(v));
}

StateVector random_state(const OperatorModel& model, Rng& rng) {
  if (const auto* s = std::get_if<ShiftGroup>(&model))
    return random_grid_state(s->grid, rng);
  Eigen::VectorXcd v(state_dim(model));
  for (int k = 0; k < v.size(); ++k) v[k] = rng.cnormal();
  return StateVector::coords(std::move(v));
}

StateVector build_state(const json& d, const OperatorModel& model, Rng& rng) {
  const std::string formula = d["formula"].get<std::string>();
  const int dim = state_dim(model);
  if (formula == "power") return power_state(dim, d["s"].get<double>());
  if (formula == "geometric") return geometric_state(dim, d["ratio"].get<double>());
  if (formula == "random") return random_state(model, rng);
  if (formula == "gaussian") {
    const auto& grid = std::get<ShiftGroup>(model).grid;
    const double center = d.value("center", 0.0);
    const double width = d.value("width", 1.0);
    const double amp = d.value("amplitude", 1.0);
    Eigen::VectorXcd v(grid.points);
    for (int j = 0; j < grid.points; ++j) {
      const double s = grid.node(j) - center;
      v[j] = amp * std::exp(-0.5 * s * s / (width * width));
    }
    return StateVector::on(grid, std::move(v));
  }
  // values
  const json& a = d["values"];
  Eigen::VectorXcd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    std::complex<double> z;
    parse_complex_entry(a[i], &z);
    v[i] = z;
  }
  if (const auto* s = std::get_if<ShiftGroup>(&model))
    return StateVector::on(s->grid, std::move(v));
  return StateVector::coords(std::move(v));
}

ExpansionKind parse_kind(const std::string& family) {
  if (family == "group") return ExpansionKind::group;
  if (family == "cosine") return ExpansionKind::cosine;
  return ExpansionKind::sine;
}

StateVector evolve_by(const OperatorModel& model, ExpansionKind kind, double t,
                      const StateVector& x) {
  switch (kind) {
    case ExpansionKind::group:
      return evolve_group(model, t, x);
    case ExpansionKind::cosine:
      return evolve_cosine(model, t, x);
    default:
      return evolve_sine(model, t, x);
  }
}

double norm_choice(const json& e) {
  return e.value("norm", std::string("l2")) == "linf" ? kInf : 2.0;
}

// ---------------------------------------------------------------------------
// per-experiment outputs

struct ExpOutput {
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  std::exception_ptr error;
};

std::string curve_dat(const std::vector<std::pair<double, ErrorCurve>>& blocks) {
  std::string out = "# degree  error\n";
  bool first = true;
  for (const auto& [t, curve] : blocks) {
    if (!first) out += "\n\n";
    first = false;
    out += "# t = " + fmt17(t) + "\n";
    for (size_t i = 0; i < curve.degrees.size(); ++i)
      out += fmt17(curve.degrees[i]) + "  " + fmt17(curve.errors[i]) + "\n";
  }
  return out;
}

std::string curve_gp(const std::string& id, size_t blocks, const RateFit* fit) {
  std::string gp;
  gp += "# gnuplot script for experiment '" + id + "'\n";
  gp += "set logscale xy\n";
  gp += "set xlabel 'expansion degree m'\n";
  gp += "set ylabel 'error'\n";
  gp += "set key left bottom\n";
  if (fit) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "fit_slope = %.6g\nfit_intercept = %.6g\n", fit->slope,
                  fit->intercept);
    gp += line;
    gp += "plot '" + id + ".dat' using 1:2 with linespoints title '" + id +
          "', exp(fit_intercept)*x**fit_slope with lines dashtype 2 "
          "title sprintf('slope %.3f', fit_slope)\n";
  } else if (blocks > 1) {
    gp += "plot for [i=0:" + std::to_string(blocks - 1) + "] '" + id +
          ".dat' index i using 1:2 with linespoints title sprintf('t block %d', i)\n";
  } else {
    gp += "plot '" + id + ".dat' using 1:2 with linespoints title '" + id + "'\n";
  }
  return gp;
}

// ---------------------------------------------------------------------------
// expand

void run_expand(const json& e, const std::string& id, Rng& rng, ExpOutput& out) {
  const OperatorModel model = build_model(e["model"], rng);
  const std::string family = e.value("family", default_family(
                                                   e["model"]["type"].get<std::string>()));
  const ExpansionKind kind = parse_kind(family);
  const StateVector x = build_state(e["data"], model, rng);
  const std::vector<double> ts = e["t"].get<std::vector<double>>();
  const std::vector<int> degrees = e["degrees"].get<std::vector<int>>();
  const double norm_p = norm_choice(e);
  const std::string norm_name = e.value("norm", std::string("l2"));
  const double tol = e["tol"].get<double>();

  std::vector<std::pair<double, ErrorCurve>> blocks;
  for (double t : ts) {
    const ErrorCurve curve = error_curve(model, x, t, degrees, kind, norm_p);
    const double denom =
        std::max(state_norm(model, evolve_by(model, kind, t, x), norm_p), 1e-300);
    for (size_t i = 0; i < degrees.size(); ++i) {
      json p{{"check", "expansion_error"}, {"family", family}, {"t", t},
             {"m", degrees[i]},            {"norm", norm_name}, {"tol", tol}};
      const double err = curve.errors[i];
      ReportRow r = make_row(id, p, err, 0.0, err <= tol);
      r.rel_err = err / denom;
      out.rows.push_back(std::move(r));
    }
    blocks.emplace_back(t, curve);
  }
  if (e.value("plot", false) && degrees.size() >= 2) {
    out.files.emplace_back(id + ".dat", curve_dat(blocks));
    out.files.emplace_back(id + ".gp", curve_gp(id, blocks.size(), nullptr));
  }

  if (!e.contains("checks")) return;
  const json& checks = e["checks"];

  if (checks.contains("coeff_agreement")) {
    const json& ca = checks["coeff_agreement"];
    const int n_max = ca["n_max"].get<int>();
    const int states = ca["states"].get<int>();
    const double ctol = ca["tol"].get<double>();
    const int top_degree =
        kind == ExpansionKind::group ? n_max : 2 * n_max + 1;
    const QuadratureRule rule =
        gauss_hermite_rule(std::max(2 * top_degree + 64, 64));
    for (int s = 0; s < states; ++s) {
      const StateVector xs = random_state(model, rng);
      const CoefficientTable table = build_coeff_table(model, kind, n_max, xs);
      std::map<double, StateVector> memo;
      auto f = [&](double t) {
        auto it = memo.find(t);
        if (it == memo.end())
          it = memo.emplace(t, evolve_by(model, kind, t, xs)).first;
        return it->second;
      };
      const double floor = 1e-280 * std::max(1.0, state_norm(model, xs, 2.0));
      double max_rel = 0.0;
      for (int n = 0; n <= n_max; ++n) {
        const int deg = kind == ExpansionKind::group
                            ? n
                            : (kind == ExpansionKind::cosine ? 2 * n : 2 * n + 1);
        const StateVector a = table.entries[n].to_state();
        const StateVector q = coeff_by_quadrature(f, deg, rule);
        const double denom =
            std::max(state_norm(model, a, 2.0), state_norm(model, q, 2.0));
        if (denom < floor) continue;  // both sides below numerical resolution
        max_rel = std::max(max_rel, state_norm(model, a - q, 2.0) / denom);
      }
      json p{{"check", "coeff_agreement"}, {"family", family}, {"state", s},
             {"n_max", n_max},             {"tol", ctol}};
      out.rows.push_back(make_row(id, p, max_rel, 0.0, max_rel <= ctol));
    }
  }

  if (checks.contains("norm_growth")) {
    const json& ng = checks["norm_growth"];
    const int n_max = ng["n_max"].get<int>();
    const double grace = ng["grace"].get<double>();
    const CoefficientTable table =
        build_coeff_table(model, ExpansionKind::group, n_max, x);
    const double log_x = std::log(std::max(state_norm(model, x, 2.0), 1e-300));
    double worst = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      const double ln = table.entries[n].log_norm2();
      if (std::isinf(ln) && ln < 0) continue;
      worst = std::max(
          worst, std::exp(ln + 0.5 * (n * M_LN2 + log_factorial(n)) - log_x));
    }
    json p{{"check", "norm_growth"}, {"n_max", n_max}, {"grace", grace}};
    out.rows.push_back(make_row(id, p, worst, 1.0, worst <= 1.0 + grace));
  }

  if (checks.contains("parity_split")) {
    const json& rc = checks["parity_split"];
    const int m = rc["m"].get<int>();
    const double ctol = rc["tol"].get<double>();
    const auto& g = std::get<DiagonalGroup>(model);
    const double denom = std::max(state_norm(model, x, 2.0), 1e-300);
    double worst_c = 0.0, worst_s = 0.0;
    for (double t : ts) {
      const StateVector gp = group_partial(model, x, t, 2 * m + 1);
      const StateVector gm = group_partial(model, x, -t, 2 * m + 1);
      const StateVector even = 0.5 * (gp + gm);
      const StateVector odd = 0.5 * (gp - gm);
      const StateVector cp = cosine_partial(model, x, t, m);
      worst_c = std::max(worst_c, state_norm(model, cp - even, 2.0) / denom);
      StateVector iqs = sine_partial(model, x, t, m);
      for (int k = 0; k < iqs.size(); ++k)
        iqs.v[k] *= std::complex<double>(0.0, g.q[k]);
      worst_s = std::max(worst_s, state_norm(model, odd - iqs, 2.0) / denom);
    }
    json pc{{"check", "parity_split_cosine"}, {"m", m}, {"tol", ctol}};
    out.rows.push_back(make_row(id, pc, worst_c, 0.0, worst_c <= ctol));
    json ps{{"check", "parity_split_sine"}, {"m", m}, {"tol", ctol}};
    out.rows.push_back(make_row(id, ps, worst_s, 0.0, worst_s <= ctol));
  }

  if (checks.contains("block_structure")) {
    const json& bs = checks["block_structure"];
    const int n_max = bs["n_max"].get<int>();
    const double btol = bs["tol"].get<double>();
    const int half = state_dim(model) / 2;
    Eigen::VectorXcd xu = x.v.head(half);
    Eigen::VectorXcd upper(2 * half), lower(2 * half);
    upper << xu, Eigen::VectorXcd::Zero(half);
    lower << Eigen::VectorXcd::Zero(half), xu;
    const CoefficientTable ta = build_coeff_table(
        model, ExpansionKind::group, n_max, StateVector::coords(upper));
    const CoefficientTable tb = build_coeff_table(
        model, ExpansionKind::group, n_max, StateVector::coords(lower));
    double off = 0.0, eq = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      const Eigen::VectorXcd a = ta.entries[n].to_state().v;
      const Eigen::VectorXcd b = tb.entries[n].to_state().v;
      if (n % 2 == 0) {
        off = std::max({off, a.tail(half).cwiseAbs().maxCoeff(),
                        b.head(half).cwiseAbs().maxCoeff()});
        eq = std::max(eq, (a.head(half) - b.tail(half)).cwiseAbs().maxCoeff());
      } else {
        off = std::max({off, a.head(half).cwiseAbs().maxCoeff(),
                        b.tail(half).cwiseAbs().maxCoeff()});
      }
    }
    json pz{{"check", "block_zero"}, {"n_max", n_max}, {"tol", btol}};
    out.rows.push_back(make_row(id, pz, off, 0.0, off <= btol));
    json pe{{"check", "block_equal"}, {"n_max", n_max}, {"tol", btol}};
    out.rows.push_back(make_row(id, pe, eq, 0.0, eq <= btol));
  }

  if (checks.contains("sharpness")) {
    const json& sh = checks["sharpness"];
    const int n_lo = sh["n_lo"].get<int>();
    const int n_hi = sh["n_hi"].get<int>();
    const double factor = sh["factor"].get<double>();
    const auto& omega = std::get<DiagonalCosine>(model).omega;
    std::vector<double> lr;
    for (int n = n_lo; n <= n_hi; ++n) {
      double lsup = -kInf;
      for (int k = 0; k < omega.size(); ++k)
        lsup = std::max(lsup,
                        2.0 * n * std::log(omega[k]) - 0.25 * omega[k] * omega[k]);
      lr.push_back(lsup - n * (std::log(4.0 * n) - 1.0));
    }
    double mean = 0.0;
    for (double v : lr) mean += v;
    mean /= static_cast<double>(lr.size());
    double dev = 0.0;
    for (double v : lr) dev = std::max(dev, std::abs(v - mean));
    json p{{"check", "sharpness"}, {"n_lo", n_lo},      {"n_hi", n_hi},
           {"factor", factor},     {"fit_c", std::exp(mean)}};
    const double value = std::exp(dev);
    out.rows.push_back(make_row(id, p, value, 1.0, value <= factor));
  }
}

// ---------------------------------------------------------------------------
// rates

void run_rates(const json& e, const std::string& id, Rng& rng, ExpOutput& out) {
  const OperatorModel model = build_model(e["model"], rng);
  const std::string family = e.value("family", default_family(
                                                   e["model"]["type"].get<std::string>()));
  const ExpansionKind kind = parse_kind(family);
  const StateVector x = build_state(e["data"], model, rng);
  const double t = e["t"].get<double>();
  const std::vector<int> degrees = e["degrees"].get<std::vector<int>>();
  const int drop = e.value("drop", 1);
  const double norm_p = norm_choice(e);
  const double reference = e["reference_slope"].get<double>();
  const double margin = e["margin"].get<double>();

  const ErrorCurve curve = error_curve(model, x, t, degrees, kind, norm_p);
  const RateFit fit = rate_fit(curve, drop);
  json p{{"check", "rate_slope"},
         {"family", family},
         {"t", t},
         {"drop", drop},
         {"norm", e.value("norm", std::string("l2"))},
         {"margin", margin},
         {"window_lo", fit.window.first},
         {"window_hi", fit.window.second},
         {"residual", fit.residual}};
  out.rows.push_back(
      make_row(id, p, fit.slope, reference, fit.slope <= reference + margin));

  if (e.value("plot", true)) {
    out.files.emplace_back(id + ".dat", curve_dat({{t, curve}}));
    out.files.emplace_back(id + ".gp", curve_gp(id, 1, &fit));
  }

  if (e.contains("bound_check")) {
    const json& bc = e["bound_check"];
    const BoundCheck b =
        coeff_bound_check(model, x, kind, bc["p"].get<int>(), bc["n_lo"].get<int>(),
                          bc["n_fit_hi"].get<int>(), bc["n_hi"].get<int>());
    json q{{"check", "coeff_bound"},
           {"family", family},
           {"p", bc["p"].get<int>()},
           {"n_lo", bc["n_lo"].get<int>()},
           {"n_fit_hi", bc["n_fit_hi"].get<int>()},
           {"n_hi", bc["n_hi"].get<int>()}};
    ReportRow r = make_row(id, q, b.c, 0.0, b.holds);
    r.abs_err = 0.0;
    r.rel_err = 0.0;
    out.rows.push_back(std::move(r));
  }
}

// ---------------------------------------------------------------------------
// kernels

std::vector<double> grid_from(const json& e, const char* key, double lo,
                              double hi, int points) {
  if (e.contains(key)) {
    const json& g = e[key];
    lo = g.value("lo", lo);
    hi = g.value("hi", hi);
    points = g.value("points", points);
  }
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i)
    out[i] = lo + (hi - lo) * i / static_cast<double>(points - 1);
  return out;
}

// signed-log H_n(t) from a shared scaled sequence
SignedLogValue poly_log(const ScaledOrthoSeq& seq, int n, double t) {
  SignedLogValue v = seq.log_value(n);
  if (v.sign == 0) return v;
  return SignedLogValue::from_log(v.sign,
                                  v.logmag + 0.5 * t * t + log_norm_factor(n));
}

// signed-log h_n(t)
SignedLogValue kernel_log(const ScaledOrthoSeq& seq, int n, double t) {
  SignedLogValue v = seq.log_value(n);
  if (v.sign == 0) return v;
  return SignedLogValue::from_log(v.sign,
                                  v.logmag - 0.5 * t * t - log_norm_factor(n));
}

double rel_residual(const SignedLogValue& r,
                    std::initializer_list<SignedLogValue> terms) {
  double scale = -kInf;
  for (const auto& v : terms)
    if (v.sign != 0) scale = std::max(scale, v.logmag);
  if (std::isinf(scale)) return 0.0;  // all terms vanish
  if (r.sign == 0) return 0.0;
  return std::exp(r.logmag - scale);
}

void run_kernels(const json& e, const std::string& id, ExpOutput& out) {
  const std::vector<double> tg = grid_from(e, "t_grid", -10.0, 10.0, 41);

  if (e.contains("h_recurrence")) {
    const json& s = e["h_recurrence"];
    const int n_max = s.value("n_max", 500);
    const double tol = s["tol"].get<double>();
    double worst = 0.0;
    for (double t : tg) {
      const ScaledOrthoSeq seq = ortho_hermite_scaled(t, n_max + 1);
      for (int n = 1; n <= n_max; ++n) {
        const SignedLogValue a = poly_log(seq, n + 1, t);
        const SignedLogValue b = poly_log(seq, n, t) * (2.0 * t);
        const SignedLogValue c = poly_log(seq, n - 1, t) * (2.0 * n);
        worst = std::max(worst, rel_residual(a - b + c, {a, b, c}));
      }
    }
    json p{{"check", "h_recurrence"}, {"n_max", n_max}, {"tol", tol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= tol));
  }

  if (e.contains("kernel_recurrence")) {
    const json& s = e["kernel_recurrence"];
    const int n_max = s.value("n_max", 300);
    const double tol = s["tol"].get<double>();
    double worst = 0.0;
    for (double t : tg) {
      const ScaledOrthoSeq seq = ortho_hermite_scaled(t, n_max + 1);
      for (int n = 1; n <= n_max; ++n) {
        const SignedLogValue a = kernel_log(seq, n + 1, t) * (2.0 * (n + 1.0));
        const SignedLogValue b = kernel_log(seq, n, t) * (2.0 * t);
        const SignedLogValue c = kernel_log(seq, n - 1, t);
        worst = std::max(worst, rel_residual(a - b + c, {a, b, c}));
      }
    }
    json p{{"check", "kernel_recurrence"}, {"n_max", n_max}, {"tol", tol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= tol));
  }

  if (e.contains("ode")) {
    const json& s = e["ode"];
    const int n_max = s.value("n_max", 300);
    const double tol = s["tol"].get<double>();
    double worst = 0.0;
    for (double t : tg) {
      const ScaledOrthoSeq seq = ortho_hermite_scaled(t, n_max + 2);
      for (int n = 0; n <= n_max; ++n) {
        // h'' + 2t h' + 2(n+1) h = 0 with the derivatives rewritten through
        // the shift identity h^{(k)} = (-2)^k (n+1)...(n+k) h_{n+k}
        const SignedLogValue a =
            kernel_log(seq, n + 2, t) * (4.0 * (n + 1.0) * (n + 2.0));
        const SignedLogValue b =
            kernel_log(seq, n + 1, t) * (-4.0 * t * (n + 1.0));
        const SignedLogValue c = kernel_log(seq, n, t) * (2.0 * (n + 1.0));
        worst = std::max(worst, rel_residual(a + b + c, {a, b, c}));
      }
    }
    json p{{"check", "ode"}, {"n_max", n_max}, {"tol", tol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= tol));
  }

  if (e.contains("deriv_fd")) {
    const json& s = e["deriv_fd"];
    const double tol = s["tol"].get<double>();
    const double step1 = s.value("step1", 1e-5);
    const double step2 = s.value("step2", 1e-4);
    std::vector<double> ns{0, 1, 3, 5, 10, 25};
    if (s.contains("n_list")) ns = s["n_list"].get<std::vector<double>>();
    std::vector<double> tl{-2.3, -0.6, 0.0, 0.4, 1.7};
    if (s.contains("t_list")) tl = s["t_list"].get<std::vector<double>>();
    double worst = 0.0;
    for (double nd : ns) {
      const int n = static_cast<int>(nd);
      for (double t : tl) {
        const double fd1 =
            (h_fn(n, t + step1) - h_fn(n, t - step1)) / (2.0 * step1);
        worst = std::max(worst, std::abs(h_fn_deriv(n, 1, t) - fd1));
        const double fd2 =
            (h_fn(n, t + step2) - 2.0 * h_fn(n, t) + h_fn(n, t - step2)) /
            (step2 * step2);
        worst = std::max(worst, std::abs(h_fn_deriv(n, 2, t) - fd2));
      }
    }
    json p{{"check", "deriv_fd"}, {"step1", step1}, {"step2", step2}, {"tol", tol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= tol));
  }

  if (e.contains("zeros")) {
    const json& s = e["zeros"];
    const double tol = s["tol"].get<double>();
    const double sym_tol = s["symmetry_tol"].get<double>();
    std::vector<double> ns{1, 2, 5, 10, 20, 40, 80, 120};
    if (s.contains("n_list")) ns = s["n_list"].get<std::vector<double>>();
    double worst = 0.0, worst_sym = 0.0;
    for (double nd : ns) {
      const int n = static_cast<int>(nd);
      const Eigen::VectorXd roots = hermite_zeros(n);
      for (int i = 0; i < n; ++i) {
        const SignedLogValue v = ortho_hermite_scaled(roots[i], n).log_value(n);
        if (v.sign != 0) worst = std::max(worst, std::exp(v.logmag));
        worst_sym = std::max(worst_sym, std::abs(roots[i] + roots[n - 1 - i]));
      }
    }
    json p{{"check", "zeros_residual"}, {"tol", tol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= tol));
    json q{{"check", "zeros_symmetry"}, {"tol", sym_tol}};
    out.rows.push_back(make_row(id, q, worst_sym, 0.0, worst_sym <= sym_tol));
  }

  if (e.contains("parity")) {
    const json& s = e["parity"];
    const int n_max = s.value("n_max", 200);
    const double tol = s["tol"].get<double>();
    double worst = 0.0;
    for (double t : tg) {
      if (!(t > 0.0)) continue;
      const OrthoHermiteSequence sp = ortho_hermite_seq(t, n_max);
      const OrthoHermiteSequence sm = ortho_hermite_seq(-t, n_max);
      for (int n = 0; n <= n_max; ++n) {
        const double expected = (n % 2 == 0) ? sm.values[n] : -sm.values[n];
        worst = std::max(worst, std::abs(sp.values[n] - expected));
      }
    }
    json p{{"check", "parity"}, {"n_max", n_max}, {"tol", tol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= tol));
  }

  if (e.contains("ortho_bound")) {
    const json& s = e["ortho_bound"];
    const int n_max = s.value("n_max", 500);
    const double bound = s["bound"].get<double>();
    const std::vector<double> grid = grid_from(s, "grid", -35.0, 35.0, 1401);
    double worst = 0.0;
    for (double t : grid) {
      const ScaledOrthoSeq seq = ortho_hermite_scaled(t, n_max);
      for (int n = 0; n <= n_max; ++n) {
        const SignedLogValue v = seq.log_value(n);
        if (v.sign != 0) worst = std::max(worst, std::exp(v.logmag));
      }
    }
    json p{{"check", "ortho_bound"}, {"n_max", n_max}, {"bound", bound}};
    out.rows.push_back(make_row(id, p, worst, bound, worst <= bound));
  }

  if (e.contains("muckenhoupt")) {
    const json& s = e["muckenhoupt"];
    const MuckenhouptFit fit =
        muckenhoupt_calibrate(s["n_lo"].get<int>(), s["n_hi"].get<int>());
    json p{{"check", "muckenhoupt"},
           {"n_lo", s["n_lo"].get<int>()},
           {"n_hi", s["n_hi"].get<int>()},
           {"gamma", fit.gamma}};
    ReportRow r = make_row(id, p, fit.c, 0.0, fit.holds);
    r.abs_err = 0.0;
    r.rel_err = 0.0;
    out.rows.push_back(std::move(r));
  }

  if (e.contains("scalar_kernels")) {
    for (const json& s : e["scalar_kernels"]) {
      const std::string family = s["family"].get<std::string>();
      const double sv = s["s"].get<double>();
      const double tv = s["t"].get<double>();
      const int terms = s["terms"].get<int>();
      const double tol = s["tol"].get<double>();
      const bool fejer = family == "fejer";
      const double approx = fejer ? fejer_partial(sv, tv, terms)
                                  : dirichlet_partial(sv, tv, terms);
      const double exact =
          fejer ? fejer_kernel(sv, tv) : dirichlet_kernel(sv, tv);
      json p{{"check", "scalar_kernel"}, {"family", family}, {"s", sv},
             {"t", tv},                  {"terms", terms},   {"tol", tol}};
      const double err = std::abs(approx - exact);
      out.rows.push_back(make_row(id, p, approx, exact, err <= tol));
    }
  }
}

// ---------------------------------------------------------------------------
// norms

void run_norms(const json& e, const std::string& id, ExpOutput& out) {
  if (e.contains("l1_bound")) {
    const json& s = e["l1_bound"];
    const int n_max = s.value("n_max", 200);
    const double grace = s["grace"].get<double>();
    double worst = 0.0;
    bool all_converged = true;
    for (int n = 0; n <= n_max; ++n) {
      const NormResult nr = h_norm_ex(n, 1.0);
      all_converged = all_converged && nr.converged;
      worst = std::max(
          worst, nr.value * std::exp(0.5 * (n * M_LN2 + log_factorial(n))));
    }
    json p{{"check", "l1_bound"},
           {"n_max", n_max},
           {"grace", grace},
           {"all_converged", all_converged}};
    out.rows.push_back(
        make_row(id, p, worst, 1.0, all_converged && worst <= 1.0 + grace));
  }

  if (e.contains("chain")) {
    const json& s = e["chain"];
    const int n_max = s.value("n_max", 60);
    const double tol = s["tol"].get<double>();
    const double bound_grace = s["bound_grace"].get<double>();
    double worst_eq = 0.0, worst_bound = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      const Eigen::VectorXd roots = hermite_zeros(n);
      double peak = 0.0;
      for (int i = 0; i < n; ++i)
        peak = std::max(peak, std::abs(h_fn(n + 1, roots[i])));
      const double lhs = (n + 1.0) / n * peak;
      const double mid = h_norm(n - 1, kInf) / (2.0 * n);
      worst_eq = std::max(worst_eq, std::abs(lhs - mid) / mid);
      worst_bound = std::max(worst_bound, std::max(lhs, mid) / h_norm(n, 1.0));
    }
    json pe{{"check", "chain_equality"}, {"n_max", n_max}, {"tol", tol}};
    out.rows.push_back(make_row(id, pe, worst_eq, 0.0, worst_eq <= tol));
    json pb{{"check", "chain_bound"}, {"n_max", n_max}, {"grace", bound_grace}};
    out.rows.push_back(
        make_row(id, pb, worst_bound, 1.0, worst_bound <= 1.0 + bound_grace));
  }
}

// ---------------------------------------------------------------------------
// holo

void run_holo(const json& e, const std::string& id, Rng& rng, ExpOutput& out) {
  const OperatorModel model = build_model(e["model"], rng);
  const std::string family =
      default_family(e["model"]["type"].get<std::string>());
  const ExpansionKind kind = parse_kind(family);
  const StateVector x = build_state(e["data"], model, rng);
  const int m = e["m"].get<int>();
  const double tol = e["tol"].get<double>();
  const double denom = std::max(state_norm(model, x, 2.0), 1e-300);

  std::vector<std::complex<double>> zs;
  if (e.contains("z"))
    for (const json& zj : e["z"]) {
      std::complex<double> z;
      parse_complex_entry(zj, &z);
      zs.push_back(z);
    }
  if (e.contains("z_sample")) {
    const json& s = e["z_sample"];
    const int count = s["count"].get<int>();
    const double rf = s["radius_frac"].get<double>();
    for (int i = 0; i < count; ++i) {
      const double r = 0.25 * rf * std::sqrt(rng.unit());
      const double phi = 2.0 * M_PI * rng.unit();
      zs.push_back(std::complex<double>(0.25 + r * std::cos(phi),
                                        r * std::sin(phi)));
    }
  }

  for (const auto& z : zs) {
    const StateVector approx = holo_series(model, x, z, m, kind);
    const StateVector exact = subordinated_exact(model, z, x);
    const double err = state_norm(model, approx - exact, 2.0);
    json p{{"check", "holo_error"}, {"family", family}, {"m", m},
           {"z_re", z.real()},      {"z_im", z.imag()}, {"tol", tol}};
    ReportRow r = make_row(id, p, err, 0.0, err <= tol);
    r.rel_err = err / denom;
    out.rows.push_back(std::move(r));
  }

  if (e.contains("quarter")) {
    const json& q = e["quarter"];
    const int qm = q["m"].get<int>();
    const double qtol = q["tol"].get<double>();
    const StateVector h0 = holo_series(model, x, {0.25, 0.0}, 0, kind);
    const StateVector hm = holo_series(model, x, {0.25, 0.0}, qm, kind);
    const double diff = (h0.v - hm.v).cwiseAbs().maxCoeff();
    json p{{"check", "quarter_stability"}, {"m", qm}, {"tol", qtol}};
    out.rows.push_back(make_row(id, p, diff, 0.0, diff <= qtol));
  }
}

// ---------------------------------------------------------------------------
// fejer

void run_fejer(const json& e, const std::string& id, Rng& rng, ExpOutput& out) {
  const OperatorModel model = build_model(e["model"], rng);
  const std::string family =
      default_family(e["model"]["type"].get<std::string>());
  const ExpansionKind kind = parse_kind(family);
  const StateVector x = build_state(e["data"], model, rng);
  const int terms = e["terms"].get<int>();
  const double tol = e["tol"].get<double>();
  const double direct_tol = e["direct_tol"].get<double>();
  const double denom = std::max(state_norm(model, x, 2.0), 1e-300);

  for (double t : e["t"].get<std::vector<double>>()) {
    const FejerDirectResult direct = fejer_family_direct_ex(model, t, x, direct_tol);
    const StateVector approx = fejer_expansion(model, x, t, terms, kind);
    const double err = state_norm(model, approx - direct.value, 2.0);
    json p{{"check", "fejer_vs_direct"},
           {"family", family},
           {"t", t},
           {"terms", terms},
           {"tol", tol},
           {"direct_tol", direct_tol},
           {"direct_converged", direct.converged}};
    ReportRow r = make_row(id, p, err, 0.0, direct.converged && err <= tol);
    r.rel_err = err / denom;
    out.rows.push_back(std::move(r));
  }

  if (e.contains("scalar_coeffs")) {
    const json& s = e["scalar_coeffs"];
    const std::vector<double> s_list = s["s_list"].get<std::vector<double>>();
    const int n_max = s["n_max"].get<int>();
    const double stol = s["tol"].get<double>();
    const QuadratureRule rule = gauss_hermite_rule(std::max(4 * n_max + 64, 64));
    double worst = 0.0;
    for (double sv : s_list) {
      const Eigen::VectorXd dc = dirichlet_coeffs(sv, n_max);
      const FejerCoeffs fc = fejer_coeffs(sv, n_max);
      auto fd = [&](double t) {
        return StateVector::coords(
            Eigen::VectorXcd::Constant(1, dirichlet_kernel(sv, t)));
      };
      auto ff = [&](double t) {
        return StateVector::coords(
            Eigen::VectorXcd::Constant(1, fejer_kernel(sv, t)));
      };
      for (int deg = 0; deg <= 2 * n_max; ++deg) {
        const std::complex<double> qd = coeff_by_quadrature(fd, deg, rule).v[0];
        const std::complex<double> qf = coeff_by_quadrature(ff, deg, rule).v[0];
        // closed forms: Dirichlet lives on odd degrees, Fejer on even ones
        double cd = 0.0, cf = 0.0;
        if (deg % 2 == 1 && (deg + 1) / 2 <= n_max) cd = dc[(deg - 1) / 2];
        if (deg == 0) cf = fc.c0;
        if (deg % 2 == 0 && deg > 0 && deg / 2 <= n_max) cf = fc.evens[deg / 2 - 1];
        worst = std::max({worst, std::abs(qd - cd), std::abs(qf - cf)});
      }
    }
    json p{{"check", "scalar_coeff_quadrature"}, {"n_max", n_max}, {"tol", stol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= stol));
  }

  if (e.contains("l1_norms")) {
    const json& s = e["l1_norms"];
    const int n_max = s["n_max"].get<int>();
    const double stol = s["tol"].get<double>();
    // substituting s = 2u makes the integrand a polynomial times e^{-u^2},
    // so a modest Gauss rule integrates |c_{2n}| exactly; the coefficient
    // carries that Gaussian itself, which the scaled weights already absorb
    const QuadratureRule rule = gauss_hermite_rule(std::max(2 * n_max + 16, 32));
    double worst = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      double acc = 0.0;
      for (int i = 0; i < rule.size(); ++i) {
        const double u = rule.nodes[i];
        const SignedLogValue c = detail::fejer_even_coeff_log(2.0 * u, n);
        if (c.sign == 0) continue;
        acc += 2.0 * std::exp(rule.log_scaled_weights[i] + c.logmag);
      }
      const double closed = fejer_coeff_l1_norm(n);
      worst = std::max(worst, std::abs(acc - closed) / closed);
    }
    json p{{"check", "fejer_l1_closed_form"}, {"n_max", n_max}, {"tol", stol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= stol));
  }

  if (e.contains("derivative_relation")) {
    const json& s = e["derivative_relation"];
    const std::vector<double> s_list = s["s_list"].get<std::vector<double>>();
    const int n_max = s["n_max"].get<int>();
    const double stol = s["tol"].get<double>();
    double worst = 0.0;
    for (double sv : s_list) {
      for (int n = 1; n <= n_max; ++n) {
        const SignedLogValue d = detail::dirichlet_coeff_log(sv, n);
        const SignedLogValue f = detail::fejer_even_coeff_log(sv, n) * (4.0 * n);
        worst = std::max(worst, rel_residual(d - f, {d, f}));
      }
    }
    json p{{"check", "derivative_relation"}, {"n_max", n_max}, {"tol", stol}};
    out.rows.push_back(make_row(id, p, worst, 0.0, worst <= stol));
  }

  if (e.contains("term_decay")) {
    const json& s = e["term_decay"];
    const double td_t = s["t"].get<double>();
    const int n_lo = s["n_lo"].get<int>();
    const int n_hi = s["n_hi"].get<int>();
    const double reference = s["reference_slope"].get<double>();
    const double margin = s["margin"].get<double>();
    const Eigen::VectorXd norms =
        fejer_expansion_term_norms(model, x, td_t, n_hi, kind);
    ErrorCurve curve;
    curve.t = td_t;
    for (int n = n_lo; n <= n_hi; ++n) {
      curve.degrees.push_back(n);
      curve.errors.push_back(norms[n - 1]);
    }
    const RateFit fit = rate_fit(curve, 0);
    json p{{"check", "fejer_term_decay"},
           {"t", td_t},
           {"n_lo", n_lo},
           {"n_hi", n_hi},
           {"margin", margin},
           {"residual", fit.residual}};
    out.rows.push_back(
        make_row(id, p, fit.slope, reference, fit.slope <= reference + margin));
  }
}

// ---------------------------------------------------------------------------
// laguerre-compare

void run_laguerre(const json& e, const std::string& id, Rng& rng, ExpOutput& out) {
  const OperatorModel model = build_model(e["model"], rng);
  const StateVector x = build_state(e["data"], model, rng);
  const double t = e["t"].get<double>();
  const int m = e["m"].get<int>();
  const double alpha = e.value("alpha", 0.0);
  const double tol_h = e["tol_hermite"].get<double>();
  const double tol_l = e["tol_laguerre"].get<double>();
  const double ratio_max = e["ratio_max"].get<double>();

  const StateVector exact = evolve_group(model, t, x);
  const double err_h = state_norm(model, exact - group_partial(model, x, t, m), 2.0);
  const double err_l =
      state_norm(model, exact - laguerre_partial(model, x, t, m, alpha), 2.0);

  json ph{{"check", "hermite_error"}, {"t", t}, {"m", m}, {"tol", tol_h}};
  out.rows.push_back(make_row(id, ph, err_h, 0.0, err_h <= tol_h));
  json pl{{"check", "laguerre_error"},
          {"t", t},
          {"m", m},
          {"alpha", alpha},
          {"tol", tol_l}};
  out.rows.push_back(make_row(id, pl, err_l, 0.0, err_l <= tol_l));
  const double ratio = err_l > 0.0 ? err_h / err_l : kInf;
  json pr{{"check", "hermite_vs_laguerre"}, {"t", t}, {"m", m},
          {"ratio_max", ratio_max}};
  out.rows.push_back(make_row(id, pr, ratio, 1.0, ratio < ratio_max));
}

void run_one(const json& e, std::uint64_t config_seed, ExpOutput& out) {
  const std::string id = e["id"].get<std::string>();
  const std::string kind = e["kind"].get<std::string>();
  Rng rng(config_seed ^ fnv1a(id));
  if (kind == "expand") return run_expand(e, id, rng, out);
  if (kind == "rates") return run_rates(e, id, rng, out);
  if (kind == "kernels") return run_kernels(e, id, out);
  if (kind == "norms") return run_norms(e, id, out);
  if (kind == "holo") return run_holo(e, id, rng, out);
  if (kind == "fejer") return run_fejer(e, id, rng, out);
  run_laguerre(e, id, rng, out);
}

}  // namespace

// ---------------------------------------------------------------------------

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error(v.empty() ? "invalid config"
                                   : "invalid config: " + v.front() +
                                         (v.size() > 1 ? " (and " +
                                                             std::to_string(v.size() - 1) +
                                                             " more)"
                                                       : "")),
      violations(std::move(v)) {}

bool RunResult::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

std::string render_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "experiment_id,param_json,value,reference,abs_err,rel_err,pass,runtime_ms\n";
  for (const auto& r : rows) {
    std::string params = "\"";
    for (char c : r.param_json) {
      params += c;
      if (c == '"') params += '"';  // CSV quote doubling
    }
    params += "\"";
    out += r.experiment_id + "," + params + "," + fmt17(r.value) + "," +
           fmt17(r.reference) + "," + fmt17(r.abs_err) + "," + fmt17(r.rel_err) +
           "," + (r.pass ? "true" : "false") + "," + fmt17(r.runtime_ms) + "\n";
  }
  return out;
}

RunResult run_experiments(const std::string& config_text,
                          const std::string& only_kind, const std::string& out_dir,
                          int threads, std::optional<std::uint64_t> seed_override) {
  json cfg;
  try {
    cfg = json::parse(config_text);
  } catch (const json::parse_error& err) {
    throw ConfigError({std::string("JSON parse error: ") + err.what()});
  }

  std::vector<std::string> errs;
  bool uses_rng = false;
  std::vector<std::string> ids;
  if (!cfg.is_object()) {
    errs.push_back("top level: must be an object");
  } else {
    if (cfg.contains("seed") &&
        !(cfg["seed"].is_number_unsigned() ||
          (cfg["seed"].is_number_integer() && cfg["seed"].get<long long>() >= 0)))
      errs.push_back("top level: 'seed' must be a nonnegative integer");
    if (!cfg.contains("experiments") || !cfg["experiments"].is_array() ||
        cfg["experiments"].empty()) {
      errs.push_back("top level: missing nonempty 'experiments' array");
    } else {
      for (size_t i = 0; i < cfg["experiments"].size(); ++i)
        validate_experiment(cfg["experiments"][i], i, errs, uses_rng, ids);
    }
  }
  if (errs.empty() && uses_rng && !seed_override.has_value() &&
      !cfg.contains("seed"))
    errs.push_back(
        "top level: 'seed' is required because an experiment uses random "
        "sampling");
  if (!errs.empty()) throw ConfigError(std::move(errs));

  const std::uint64_t seed =
      seed_override.value_or(cfg.value("seed", std::uint64_t{0}));

  std::vector<const json*> selected;
  for (const auto& e : cfg["experiments"])
    if (only_kind.empty() || e["kind"].get<std::string>() == only_kind)
      selected.push_back(&e);
  if (selected.empty())
    throw ConfigError({"no experiments of kind '" + only_kind + "' in config"});

  std::vector<ExpOutput> outputs(selected.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= selected.size()) return;
      try {
        run_one(*selected[i], seed, outputs[i]);
      } catch (...) {
        outputs[i].error = std::current_exception();
      }
    }
  };
  const int pool = std::max(1, std::min<int>(threads, static_cast<int>(selected.size())));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> team;
    team.reserve(pool);
    for (int i = 0; i < pool; ++i) team.emplace_back(worker);
    for (auto& th : team) th.join();
  }
  for (const auto& o : outputs)
    if (o.error) std::rethrow_exception(o.error);  // nothing is persisted

  RunResult result;
  for (const auto& o : outputs)
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());

  std::filesystem::create_directories(out_dir);
  auto emit = [&](const std::string& name, const std::string& content) {
    std::ofstream ofs(std::filesystem::path(out_dir) / name, std::ios::binary);
    ofs << content;
    if (!ofs.good()) throw std::runtime_error("failed to write " + name);
    result.files_written.push_back(name);
  };

  emit("report.csv", render_csv(result.rows));

  json jrows = json::array();
  for (const auto& r : result.rows) {
    jrows.push_back(json{{"experiment_id", r.experiment_id},
                         {"param_json", json::parse(r.param_json)},
                         {"value", r.value},
                         {"reference", r.reference},
                         {"abs_err", r.abs_err},
                         {"rel_err", r.rel_err},
                         {"pass", r.pass},
                         {"runtime_ms", r.runtime_ms}});
  }
  emit("report.json", json{{"rows", jrows}}.dump(2) + "\n");

  for (const auto& o : outputs)
    for (const auto& [name, content] : o.files) emit(name, content);

  return result;
}

}  // namespace hermexp
