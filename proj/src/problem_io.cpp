#include "lpm/problem_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace lpm {

namespace {

struct Pair {
  std::string section;
  std::string key;
  std::string value;
  bool quoted = false;
  int line = 0;
};

std::vector<Pair> tokenize(const std::string& text) {
  std::vector<Pair> pairs;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    for (;;) {
      skip_ws();
      if (i >= line.size() || line[i] == '#') break;
      if (line[i] == '[') {
        std::size_t close = line.find(']', i);
        if (close == std::string::npos)
          throw FileParseError("unterminated section header", lineno);
        section = line.substr(i + 1, close - i - 1);
        i = close + 1;
        continue;
      }
      std::size_t start = i;
      while (i < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
        ++i;
      if (i == start) throw FileParseError("expected a key name", lineno);
      std::string key = line.substr(start, i - start);
      skip_ws();
      if (i >= line.size() || line[i] != '=')
        throw FileParseError("expected '=' after key '" + key + "'", lineno);
      ++i;
      skip_ws();
      if (i >= line.size()) throw FileParseError("missing value for key '" + key + "'", lineno);
      Pair p;
      p.section = section;
      p.key = key;
      p.line = lineno;
      if (line[i] == '"') {
        std::size_t close = line.find('"', i + 1);
        if (close == std::string::npos)
          throw FileParseError("unterminated quoted value for key '" + key + "'", lineno);
        p.value = line.substr(i + 1, close - i - 1);
        p.quoted = true;
        i = close + 1;
      } else {
        std::size_t vstart = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#')
          ++i;
        p.value = line.substr(vstart, i - vstart);
      }
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

double parse_number(const Pair& p) {
  char* end = nullptr;
  double v = std::strtod(p.value.c_str(), &end);
  if (end == p.value.c_str() || *end != '\0' || !std::isfinite(v))
    throw FileParseError("key '" + p.key + "': expected a number, got '" + p.value + "'",
                         p.line);
  return v;
}

int parse_int(const Pair& p) {
  double v = parse_number(p);
  if (v != std::floor(v))
    throw FileParseError("key '" + p.key + "': expected an integer", p.line);
  return static_cast<int>(v);
}

}  // namespace

Problem parse_problem_text(const std::string& text, const std::string& origin) {
  auto pairs = tokenize(text);

  // pass 1: dimensions and named constants (needed to parse expressions)
  int n = -1, k = -1;
  expr::Constants constants;
  for (const Pair& p : pairs) {
    if (p.section == "system" && p.key == "n") n = parse_int(p);
    if (p.section == "system" && p.key == "k") k = parse_int(p);
    if (p.section == "constants") constants[p.key] = parse_number(p);
  }
  if (n < 0) throw MissingRequired(origin + ": missing required key n in [system]");
  if (k < 0) throw MissingRequired(origin + ": missing required key k in [system]");
  if (n < 2 || k < 1 || k > n - 1)
    throw MissingRequired(origin + ": need n >= 2 and 1 <= k <= n-1");

  Problem out;
  out.spec.n = n;
  out.spec.k = k;
  out.spec.f.resize(n);
  out.spec.name = origin;

  std::vector<bool> f_seen(n, false);
  bool l1_seen = false, l2_seen = false, gamma_seen = false, rho_seen = false;

  auto parse_expr_checked = [&](const Pair& p) {
    try {
      return expr::Expr::parse(p.value, n, constants);
    } catch (const expr::ParseError& e) {
      throw FileParseError("key '" + p.key + "': " + e.what() + " (column " +
                               std::to_string(e.position + 1) + ")",
                           p.line);
    }
  };

  for (const Pair& p : pairs) {
    if (p.section == "system") {
      if (p.key == "n" || p.key == "k") continue;
      if (p.key == "lipschitz_l1") {
        out.spec.L1 = parse_number(p);
        l1_seen = true;
        if (out.spec.L1 < 0.0) throw RangeError("lipschitz_l1 must be >= 0", p.line);
        continue;
      }
      if (p.key == "lipschitz_l2") {
        out.spec.L2 = parse_number(p);
        l2_seen = true;
        if (out.spec.L2 <= 0.0) throw RangeError("lipschitz_l2 must be > 0", p.line);
        continue;
      }
      if (p.key == "gamma") {
        out.spec.gamma = parse_number(p);
        gamma_seen = true;
        continue;
      }
      if (p.key == "rho") {
        out.spec.rho = parse_number(p);
        rho_seen = true;
        continue;
      }
      if (p.key.size() == 3 && p.key[0] == 'A' && std::isdigit(p.key[1]) &&
          std::isdigit(p.key[2])) {
        int i = p.key[1] - '0', j = p.key[2] - '0';
        if (i < 1 || i > n || j < 1 || j > n)
          throw RangeError("matrix entry " + p.key + " outside the " + std::to_string(n) +
                               "-dimensional system",
                           p.line);
        out.spec.set_a(i - 1, j - 1, parse_expr_checked(p));
        continue;
      }
      if (p.key.size() >= 2 && p.key[0] == 'f') {
        bool digits = true;
        for (std::size_t c = 1; c < p.key.size(); ++c)
          if (!std::isdigit(static_cast<unsigned char>(p.key[c]))) digits = false;
        if (digits) {
          int idx = std::stoi(p.key.substr(1));
          if (idx < 1 || idx > n)
            throw RangeError("component " + p.key + " outside the system dimension", p.line);
          out.spec.f[idx - 1] = parse_expr_checked(p);
          f_seen[idx - 1] = true;
          continue;
        }
      }
      throw UnknownKey("unknown key '" + p.key + "' in [system]", p.line);
    }
    if (p.section == "norms") {
      if (p.key == "ambient") {
        auto a = ambient_from_name(p.value);
        if (!a) throw RangeError("ambient norm must be max, sum or euclid", p.line);
        out.spec.ambient = *a;
        continue;
      }
      if (p.key == "gamma") {
        if (p.value == "max") {
          out.spec.gamma_norm = AdmissibleNorm::max_norm();
        } else {
          double pv = parse_number(p);
          if (pv < 1.0) throw RangeError("gamma norm parameter p must be >= 1", p.line);
          out.spec.gamma_norm = AdmissibleNorm::p_norm(pv);
        }
        continue;
      }
      throw UnknownKey("unknown key '" + p.key + "' in [norms]", p.line);
    }
    if (p.section == "grid") {
      if (p.key == "h") {
        out.grid.h = parse_number(p);
        if (out.grid.h <= 0.0) throw RangeError("h must be positive", p.line);
        continue;
      }
      if (p.key == "t_window") {
        out.grid.T_window = parse_number(p);
        continue;
      }
      if (p.key == "t_norm") {
        out.grid.T_norm = parse_number(p);
        continue;
      }
      if (p.key == "tol") {
        out.grid.tol_fixed_point = parse_number(p);
        if (out.grid.tol_fixed_point <= 0.0) throw RangeError("tol must be positive", p.line);
        continue;
      }
      if (p.key == "tail_tol") {
        out.grid.tail_tol = parse_number(p);
        if (out.grid.tail_tol <= 0.0) throw RangeError("tail_tol must be positive", p.line);
        continue;
      }
      throw UnknownKey("unknown key '" + p.key + "' in [grid]", p.line);
    }
    if (p.section == "constants") continue;
    throw UnknownKey("unknown section [" + p.section + "]", p.line);
  }

  for (int i = 0; i < n; ++i)
    if (!f_seen[i])
      throw MissingRequired(origin + ": missing required component f" + std::to_string(i + 1));
  if (!l1_seen) throw MissingRequired(origin + ": missing required key lipschitz_l1");
  if (!l2_seen) throw MissingRequired(origin + ": missing required key lipschitz_l2");
  if (!gamma_seen) throw MissingRequired(origin + ": missing required key gamma");
  if (!rho_seen) throw MissingRequired(origin + ": missing required key rho");
  if (!(out.spec.gamma > out.spec.rho))
    throw MissingRequired(origin + ": gamma must exceed rho");

  try {
    out.grid.validate();
  } catch (const Error& e) {
    throw MissingRequired(origin + ": " + e.what());
  }
  return out;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  Problem p = parse_problem_text(buf.str(), path);
  return p;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string save_problem_text(const ProblemSpec& spec, const GridConfig& grid) {
  // expressions are written in canonical form (named constants inlined), so
  // a saved file is self-contained
  std::ostringstream out;
  out << "[system]\n";
  out << "n = " << spec.n << "\n";
  out << "k = " << spec.k << "\n";
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j)
      if (const auto& e = spec.a(i, j))
        out << "A" << (i + 1) << (j + 1) << " = \"" << e->to_string() << "\"\n";
  for (int i = 0; i < spec.n; ++i)
    out << "f" << (i + 1) << " = \"" << spec.f[i].to_string() << "\"\n";
  out << "lipschitz_l1 = " << num(spec.L1) << "\n";
  out << "lipschitz_l2 = " << num(spec.L2) << "\n";
  out << "gamma = " << num(spec.gamma) << "\n";
  out << "rho = " << num(spec.rho) << "\n";
  out << "[norms]\n";
  out << "ambient = " << ambient_name(spec.ambient) << "\n";
  out << "gamma = " << spec.gamma_norm.name() << "\n";
  out << "[grid]\n";
  out << "h = " << num(grid.h) << "\n";
  out << "t_window = " << num(grid.T_window) << "\n";
  out << "t_norm = " << num(grid.T_norm) << "\n";
  out << "tol = " << num(grid.tol_fixed_point) << "\n";
  out << "tail_tol = " << num(grid.tail_tol) << "\n";
  return out.str();
}

void save_problem(const std::string& path, const ProblemSpec& spec, const GridConfig& grid) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write problem file: " + path);
  out << save_problem_text(spec, grid);
}

bool specs_equal(const ProblemSpec& a, const ProblemSpec& b) {
  if (a.n != b.n || a.k != b.k || a.L1 != b.L1 || a.L2 != b.L2 || a.gamma != b.gamma ||
      a.rho != b.rho || a.ambient != b.ambient || !(a.gamma_norm == b.gamma_norm))
    return false;
  for (int i = 0; i < a.n; ++i) {
    if (a.f[i].to_string() != b.f[i].to_string()) return false;
    for (int j = 0; j < a.n; ++j) {
      const auto& ea = a.a(i, j);
      const auto& eb = b.a(i, j);
      if (ea.has_value() != eb.has_value()) return false;
      if (ea && ea->to_string() != eb->to_string()) return false;
    }
  }
  return true;
}

}  // namespace lpm
