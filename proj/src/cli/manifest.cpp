#include "cdch/manifest.hpp"

#include "cdch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cdch::cli {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw InvalidSpec(msg); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      fail("unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
  return v.get<int>();
}

Point point(const json& obj, const char* key, const std::string& where, const Point& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(where + "." + key + " must be an [x, y] pair");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> number_list(const json& obj, const char* key, const std::string& where) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) fail(where + "." + key + " must be a number or a list of numbers");
  for (const auto& x : v) {
    if (!x.is_number()) fail(where + "." + key + " must contain numbers only");
    out.push_back(x.get<double>());
  }
  return out;
}

Eigen::Matrix2d matrix(const json& v, const std::string& where) {
  auto bad = [&] { fail(where + " must be a 2x2 array of numbers"); };
  if (!v.is_array() || v.size() != 2) bad();
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r) {
    if (!v[r].is_array() || v[r].size() != 2) bad();
    for (int c = 0; c < 2; ++c) {
      if (!v[r][c].is_number()) bad();
      m(r, c) = v[r][c].get<double>();
    }
  }
  return m;
}

bool power_of_two_in_range(int r) { return r >= 32 && r <= 1024 && (r & (r - 1)) == 0; }

struct CommandNeeds {
  bool resolution = false;
  bool alpha = false;
  bool periodic = false;
};

CommandNeeds needs(const std::string& command) {
  if (command == "solve" || command == "cdc-scan" || command == "vdc-scan" ||
      command == "capacity") {
    return {true, false, false};
  }
  if (command == "morrey" || command == "barrier" || command == "hoelder") return {true, true, false};
  if (command == "cell" || command == "rate") return {false, false, true};
  return {};
}

// Checks one section and records its first problem.
template <class Fn>
void section(std::vector<std::string>& problems, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    problems.emplace_back(e.what());
  } catch (const json::exception& e) {
    problems.emplace_back(std::string("malformed manifest: ") + e.what());
  }
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> list = {"solve", "morrey",  "capacity", "cdc-scan",
                                                "vdc-scan", "hardy", "barrier", "cell",
                                                "rate", "hoelder", "radial"};
  return list;
}

DomainSpec parse_domain(const json& d) {
  const std::string where = "domain";
  allow_keys(d, where,
             {"kind", "center", "radius", "inner_radius", "inner_center", "width", "height",
              "level", "side", "openings"});
  DomainSpec spec;
  if (d.contains("kind")) {
    if (!d.at("kind").is_string()) fail("domain.kind must be a string");
    const auto kind = domain_kind_from_string(d.at("kind").get<std::string>());
    if (!kind) fail("unknown domain kind '" + d.at("kind").get<std::string>() + "'");
    spec.kind = *kind;
  }
  spec.center = point(d, "center", where, spec.center);
  spec.radius = number(d, "radius", where, spec.radius);
  spec.inner_radius = number(d, "inner_radius", where, spec.inner_radius);
  spec.inner_center = point(d, "inner_center", where, spec.center);
  spec.width = number(d, "width", where, spec.width);
  spec.height = number(d, "height", where, spec.height);
  spec.level = integer(d, "level", where, spec.level);
  spec.side = number(d, "side", where, spec.side);
  if (d.contains("openings")) {
    const json& o = d.at("openings");
    if (!o.is_array()) fail("domain.openings must be a list of [a, b] intervals");
    for (const auto& iv : o) {
      if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
        fail("domain.openings must be a list of [a, b] intervals");
      }
      spec.openings.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    }
  }
  spec.validate();
  return spec;
}

MeasureSpec parse_measure(const json& m) {
  if (m.is_string()) {
    if (m.get<std::string>() == "zero") return MeasureSpec::zero();
    fail("measure must be \"zero\" or an object with a terms list");
  }
  allow_keys(m, "measure", {"terms"});
  MeasureSpec spec;
  if (!m.contains("terms")) return spec;
  if (!m.at("terms").is_array()) fail("measure.terms must be a list");
  int index = 0;
  for (const auto& t : m.at("terms")) {
    const std::string where = "measure.terms[" + std::to_string(index++) + "]";
    if (!t.is_object() || !t.contains("type") || !t.at("type").is_string()) {
      fail(where + " needs a string 'type'");
    }
    const std::string type = t.at("type").get<std::string>();
    const int sign = integer(t, "sign", where, 1);
    if (sign != 1 && sign != -1) fail(where + ".sign must be 1 or -1");
    MeasureSpec term;
    if (type == "density") {
      allow_keys(t, where, {"type", "profile", "amplitude", "exponent", "sign", "lower", "upper"});
      const std::string profile = t.value("profile", std::string("constant"));
      const double amp = number(t, "amplitude", where, 1.0);
      if (profile == "constant") {
        term = MeasureSpec::density(Density::constant(amp), sign);
      } else if (profile == "sin_product") {
        term = MeasureSpec::density(Density::sin_product(amp), sign);
      } else if (profile == "delta_power") {
        term = MeasureSpec::density(Density::delta_power(amp, number(t, "exponent", where, 0.0)), sign);
      } else {
        fail(where + ".profile must be constant, sin_product or delta_power");
      }
    } else if (type == "point_mass") {
      allow_keys(t, where, {"type", "at", "weight", "sign", "lower", "upper"});
      if (!t.contains("at")) fail(where + " needs 'at'");
      term = MeasureSpec::point_mass(point(t, "at", where, Point::Zero()),
                                     number(t, "weight", where, 1.0), sign);
    } else if (type == "circle") {
      allow_keys(t, where, {"type", "center", "radius", "weight", "sign", "lower", "upper"});
      const double r = number(t, "radius", where, 0.0);
      if (!(r > 0.0)) fail(where + ".radius must be positive");
      term = MeasureSpec::circle(point(t, "center", where, Point::Zero()), r,
                                 number(t, "weight", where, 1.0), sign);
    } else {
      fail(where + ".type must be density, point_mass or circle");
    }
    auto& r = term.terms.front().restriction;
    r.lower = number(t, "lower", where, r.lower);
    r.upper = number(t, "upper", where, r.upper);
    spec.add(term);
  }
  return spec;
}

PeriodicSpec parse_periodic(const json& p) {
  const std::string where = "coefficient.periodic";
  allow_keys(p, where, {"kind", "n", "a", "b", "matrix"});
  PeriodicSpec spec;
  if (p.contains("kind")) {
    if (!p.at("kind").is_string()) fail(where + ".kind must be a string");
    spec.kind = periodic_kind_from_string(p.at("kind").get<std::string>());
  }
  spec.n = integer(p, "n", where, spec.n);
  if (spec.n < 8 || spec.n > 1024) fail(where + ".n must lie in [8, 1024]");
  spec.a = number(p, "a", where, spec.a);
  spec.b = number(p, "b", where, spec.b);
  if (!(spec.a > 0.0 && spec.b > 0.0)) fail(where + " values a and b must be positive");
  if (spec.kind == PeriodicSpec::Kind::checkerboard && spec.n % 4 != 0) {
    fail(where + ".n must be a multiple of 4 for the checkerboard");
  }
  if (p.contains("matrix")) spec.matrix = matrix(p.at("matrix"), where + ".matrix");
  return spec;
}

SolverSettings parse_solver(const json& numerics) {
  SolverSettings s;
  if (numerics.is_null()) return s;
  s.tol = number(numerics, "tol", "numerics", s.tol);
  if (!(s.tol > 0.0 && s.tol < 1.0)) fail("numerics.tol must lie in (0, 1)");
  if (numerics.contains("max_iter")) {
    if (!numerics.at("max_iter").is_number_integer() || numerics.at("max_iter").get<long>() < 0) {
      fail("numerics.max_iter must be a nonnegative integer");
    }
    s.max_iter = numerics.at("max_iter").get<long>();
  }
  if (numerics.contains("precond")) {
    const json& p = numerics.at("precond");
    if (!p.is_string() || (p != "jacobi" && p != "ssor")) {
      fail("numerics.precond must be \"jacobi\" or \"ssor\"");
    }
    s.precond = preconditioner_from_string(p.get<std::string>());
  }
  return s;
}

std::vector<std::string> validate(const json& m) {
  std::vector<std::string> problems;
  if (!m.is_object()) return {"manifest must be a JSON object"};
  section(problems, [&] {
    allow_keys(m, "manifest", {"command", "domain", "coefficient", "measure", "numerics", "output"});
  });
  if (!m.contains("command") || !m.at("command").is_string()) {
    problems.emplace_back("command is required and must be a string");
    return problems;
  }
  const std::string command = m.at("command").get<std::string>();
  const auto& all = commands();
  if (std::find(all.begin(), all.end(), command) == all.end()) {
    problems.emplace_back("unknown command '" + command + "'");
    return problems;
  }
  const CommandNeeds need = needs(command);
  const json numerics = m.value("numerics", json::object());
  if (!numerics.is_object()) {
    problems.emplace_back("numerics must be an object");
    return problems;
  }

  section(problems, [&] {
    allow_keys(numerics, "numerics",
               {"resolution", "resolutions", "tol", "max_iter", "precond", "eps_list", "alpha",
                "alpha0", "q", "n", "R", "samples", "scales", "radii", "cells_per_period",
                "barrier", "potentials", "epsilon", "profile_samples"});
  });
  section(problems, [&] { parse_solver(numerics); });

  DomainSpec domain;
  bool domain_ok = true;
  if (m.contains("domain")) {
    domain_ok = false;
    section(problems, [&] {
      domain = parse_domain(m.at("domain"));
      domain_ok = true;
    });
  }
  if (m.contains("measure")) section(problems, [&] { parse_measure(m.at("measure")); });

  bool periodic = false;
  if (m.contains("coefficient")) {
    section(problems, [&] {
      const json& c = m.at("coefficient");
      allow_keys(c, "coefficient", {"matrix", "periodic"});
      if (c.contains("matrix") && c.contains("periodic")) {
        fail("coefficient takes either matrix or periodic, not both");
      }
      if (c.contains("matrix")) {
        const Eigen::Matrix2d a = matrix(c.at("matrix"), "coefficient.matrix");
        const auto [lambda, L] = envelope_probe(a);
        if (!(lambda > 0.0)) fail("coefficient.matrix is not uniformly elliptic");
        (void)L;
      }
      if (c.contains("periodic")) {
        parse_periodic(c.at("periodic"));
        periodic = true;
      }
    });
  }
  if (need.periodic && !periodic) {
    problems.emplace_back(command + " requires coefficient.periodic");
  }

  auto check_resolution = [&](const json& r, const std::string& name) {
    if (!r.is_number_integer() || !power_of_two_in_range(r.get<int>())) {
      problems.emplace_back(name + " must be a power of two in [32,1024]");
    }
  };
  if (numerics.contains("resolution")) {
    check_resolution(numerics.at("resolution"), "resolution");
  } else if (need.resolution || (command == "hardy" && !numerics.contains("resolutions"))) {
    problems.emplace_back(command + " requires numerics.resolution");
  }
  if (numerics.contains("resolutions")) {
    const json& rs = numerics.at("resolutions");
    if (!rs.is_array() || rs.empty()) {
      problems.emplace_back("resolutions must be a nonempty list");
    } else {
      for (const auto& r : rs) check_resolution(r, "resolutions entry");
    }
  }

  section(problems, [&] {
    if (numerics.contains("alpha")) {
      const double a = number(numerics, "alpha", "numerics", 0.0);
      const bool radial = command == "radial";
      if (radial ? !(a > 0.0 && a < 1.0) : !(a > 0.0 && a <= 1.0)) {
        fail(radial ? "alpha must lie in (0, 1)" : "alpha must lie in (0, 1]");
      }
    } else if (need.alpha || command == "radial") {
      fail(command + " requires numerics.alpha");
    }
  });
  if (command == "hoelder") {
    section(problems, [&] {
      const auto a0 = number_list(numerics, "alpha0", "numerics");
      if (a0.empty()) fail("hoelder requires numerics.alpha0");
      for (double a : a0) {
        if (!(a > 0.0 && a <= 1.0)) fail("alpha0 values must lie in (0, 1]");
      }
    });
  }
  if (command == "rate") {
    section(problems, [&] {
      const auto eps = number_list(numerics, "eps_list", "numerics");
      if (eps.size() < 4) fail("eps_list requires ≥ 4 values");
      for (double e : eps) {
        if (!(e > 0.0 && e <= 1.0)) fail("eps_list values must lie in (0, 1]");
      }
      std::set<double> distinct(eps.begin(), eps.end());
      if (distinct.size() != eps.size()) fail("eps_list values must be distinct");
      const int cpp = integer(numerics, "cells_per_period", "numerics", 16);
      if (cpp < 8) fail("cells_per_period must be at least 8");
    });
  }
  if (numerics.contains("epsilon")) {
    section(problems, [&] {
      const double e = number(numerics, "epsilon", "numerics", 1.0);
      if (!(e > 0.0 && e <= 1.0)) fail("epsilon must lie in (0, 1]");
      if (!periodic) fail("epsilon needs coefficient.periodic");
    });
  }
  if (command == "radial") {
    section(problems, [&] {
      if (!numerics.contains("n") || !numerics.contains("R")) fail("radial requires numerics.n and numerics.R");
      if (integer(numerics, "n", "numerics", 0) < 3) fail("n must be at least 3");
      const double R = number(numerics, "R", "numerics", 0.0);
      if (!(R > 0.0 && R < 1.0)) fail("R must lie in (0, 1)");
      if (integer(numerics, "profile_samples", "numerics", 2048) < 16) {
        fail("profile_samples must be at least 16");
      }
    });
  }
  if (command == "morrey" && numerics.contains("q")) {
    section(problems, [&] {
      if (!(number(numerics, "q", "numerics", 1.0) >= 1.0)) fail("q must be at least 1");
    });
  }
  if (command == "cdc-scan" || command == "vdc-scan") {
    section(problems, [&] {
      if (integer(numerics, "samples", "numerics", 512) < 1) fail("samples must be positive");
      if (integer(numerics, "scales", "numerics", 4) < 1) fail("scales must be positive");
      for (double r : number_list(numerics, "radii", "numerics")) {
        if (!(r > 0.0)) fail("radii must be positive");
      }
    });
  }
  if (command == "barrier" && numerics.contains("barrier")) {
    const json& b = numerics.at("barrier");
    if (!b.is_string() || (b != "distance" && b != "torsion")) {
      problems.emplace_back("barrier must be \"distance\" or \"torsion\"");
    }
  }
  if (command == "capacity" && domain_ok && domain.kind != DomainKind::condenser) {
    problems.emplace_back("capacity requires a condenser domain");
  }
  if (m.contains("output") && !m.at("output").is_string()) {
    problems.emplace_back("output must be a directory path string");
  }
  return problems;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cdch::cli
