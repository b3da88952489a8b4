#include "unitlab/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "unitlab/kernel_json.hpp"

namespace unitlab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

// A value together with where it starts in the file.
struct Located {
  std::string_view text;
  std::size_t line = 0;
  std::size_t column = 0;

  [[noreturn]] void fail(const std::string& message, std::size_t offset = 0) const {
    throw ParseError(message, line, column + offset);
  }
};

Matrix parse_matrix(const Located& v) {
  std::vector<std::vector<Complex>> rows;
  const std::string_view s = v.text;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  };
  auto want = [&](char c) {
    skip();
    if (i >= s.size() || s[i] != c) v.fail(std::string("expected '") + c + "'", i);
    ++i;
  };
  want('[');
  for (;;) {
    want('[');
    std::vector<Complex> row;
    for (;;) {
      skip();
      const std::size_t start = i;
      while (i < s.size() && s[i] != ',' && s[i] != ']') ++i;
      try {
        row.push_back(parse_complex(s.substr(start, i - start)));
      } catch (const ParseError& e) {
        v.fail(e.what(), start);
      }
      if (i < s.size() && s[i] == ',') {
        ++i;
        continue;
      }
      want(']');
      break;
    }
    rows.push_back(std::move(row));
    skip();
    if (i < s.size() && s[i] == ',') {
      ++i;
      continue;
    }
    want(']');
    break;
  }
  skip();
  if (i != s.size()) v.fail("trailing characters after matrix", i);
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) v.fail("matrix rows have different lengths");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return m;
}

std::string format_matrix(const Matrix& m) {
  std::string out = "[";
  for (int r = 0; r < m.rows(); ++r) {
    out += r ? ", [" : "[";
    for (int c = 0; c < m.cols(); ++c) out += (c ? ", " : "") + format_complex(m(r, c));
    out += "]";
  }
  return out + "]";
}

std::vector<Located> split_list(const Located& v) {
  std::vector<Located> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = v.text.find(',', start);
    const std::string_view raw = v.text.substr(start, comma == std::string_view::npos ? comma : comma - start);
    std::size_t lead = 0;
    while (lead < raw.size() && std::isspace(static_cast<unsigned char>(raw[lead]))) ++lead;
    out.push_back({trim(raw), v.line, v.column + start + lead});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const Located& v, const char* what) {
  T value{};
  const auto s = v.text;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    v.fail(std::string("expected ") + what + ", got '" + std::string(s) + "'");
  return value;
}

bool parse_bool(const Located& v) {
  if (v.text == "true") return true;
  if (v.text == "false") return false;
  v.fail("expected true or false");
}

double positive(const Located& v, const char* what) {
  const double x = parse_number<double>(v, what);
  if (!(x > 0.0)) v.fail(std::string(what) + " must be positive");
  return x;
}

}  // namespace

ExpressionContext Scenario::context() const {
  ExpressionContext ctx;
  ctx.dim = dim;
  ctx.labels = labels;
  for (const auto& m : matrices) ctx.matrices.emplace(m.name, m.value);
  return ctx;
}

OperatorKernel Scenario::build_generator() const {
  switch (generator.kind) {
    case GeneratorSpec::Kind::covariance:
      return OperatorKernel::scalar(generator.gamma, labels);
    case GeneratorSpec::Kind::kernel: {
      const OperatorKernel k = read_kernel_file(base_dir / generator.kernel_file);
      if (k.dim() != dim) throw DimensionError("kernel file has dim " + std::to_string(k.dim()));
      std::vector<std::size_t> order;
      for (const auto& l : labels) order.push_back(k.index_of(l));
      if (k.size() != labels.size()) throw LabelError("kernel file labels differ from the scenario labels");
      return k.permuted(order);
    }
    case GeneratorSpec::Kind::ce:
      break;
  }
  const auto ctx = context();
  auto lookup = [&](const std::string& name) -> const Matrix& { return ctx.matrices.at(name); };
  std::vector<std::vector<Matrix>> eta(labels.size());
  std::vector<Matrix> beta(labels.size(), Matrix::Zero(dim, dim));
  std::size_t rank = 0;
  for (const auto& [label, names] : generator.eta) {
    const auto s = std::find(labels.begin(), labels.end(), label) - labels.begin();
    for (const auto& n : names) eta[s].push_back(lookup(n));
    rank = std::max(rank, names.size());
  }
  for (auto& e : eta) e.resize(rank, Matrix::Zero(dim, dim));
  for (const auto& [label, name] : generator.beta)
    beta[std::find(labels.begin(), labels.end(), label) - labels.begin()] = lookup(name);

  OperatorKernel q(dim, labels);
  for (std::size_t s = 0; s < labels.size(); ++s)
    for (std::size_t t = 0; t < labels.size(); ++t) {
      Superoperator entry = Superoperator::left(beta[s].adjoint()) + Superoperator::right(beta[t]);
      for (std::size_t r = 0; r < rank; ++r)
        entry += Superoperator::sandwich(eta[s][r].adjoint(), eta[t][r]);
      q.set(s, t, entry);
    }
  return q;
}

UnitExpression Scenario::expression(std::string_view name) const {
  for (const auto& e : expressions)
    if (e.name == name)
      return parse_expression(e.source, context(), e.line ? e.line : 1, e.line ? e.column : 1);
  throw LabelError("no expression named '" + std::string(name) + "'");
}

bool operator==(const Scenario& a, const Scenario& b) {
  auto same_matrices = [](const std::vector<NamedMatrix>& x, const std::vector<NamedMatrix>& y) {
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin(), [](auto& p, auto& q) {
             return p.name == q.name && same_matrix(p.value, q.value);
           });
  };
  auto same_expressions = [](const std::vector<NamedExpression>& x, const std::vector<NamedExpression>& y) {
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin(), [](auto& p, auto& q) {
             return p.name == q.name && p.source == q.source;
           });
  };
  const auto& ga = a.generator;
  const auto& gb = b.generator;
  const bool same_generator = ga.kind == gb.kind && ga.eta == gb.eta && ga.beta == gb.beta &&
                              ga.kernel_file == gb.kernel_file && same_matrix(ga.gamma, gb.gamma);
  return a.name == b.name && a.dim == b.dim && a.labels == b.labels && a.horizon == b.horizon &&
         a.schedule == b.schedule && a.seed == b.seed && a.threads == b.threads &&
         a.zeta_label == b.zeta_label && a.fock_crosscheck == b.fock_crosscheck &&
         same_matrices(a.matrices, b.matrices) && same_generator &&
         same_expressions(a.expressions, b.expressions) && a.expectations == b.expectations &&
         a.thresholds == b.thresholds;
}

Scenario parse_scenario(std::string_view text, std::string name) {
  Scenario sc;
  sc.name = std::move(name);
  std::string section;
  std::set<std::string> seen_sections;
  std::map<std::string, Located> system_keys;
  std::vector<std::pair<std::string, Located>> matrix_defs, generator_defs, expect_defs, threshold_defs;
  bool have_dim = false, have_labels = false;
  std::set<std::string> keys_in_section;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view body = trim(line);
    if (body.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const std::size_t indent = static_cast<std::size_t>(body.data() - line.data());
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError("unterminated section header", line_no, indent + 1);
      section = std::string(trim(body.substr(1, body.size() - 2)));
      static const std::set<std::string> known{"system",      "matrices", "generator",
                                               "expressions", "expect",   "thresholds"};
      if (!known.count(section))
        throw ParseError("unknown section [" + section + "]", line_no, indent + 1);
      if (!seen_sections.insert(section).second)
        throw ParseError("duplicate section [" + section + "]", line_no, indent + 1);
      keys_in_section.clear();
      if (eol == text.size()) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, indent + 1);
    if (section.empty()) throw ParseError("entry outside of a section", line_no, indent + 1);
    const std::string key(trim(line.substr(0, eq)));
    std::string_view raw = line.substr(eq + 1);
    std::size_t lead = 0;
    while (lead < raw.size() && std::isspace(static_cast<unsigned char>(raw[lead]))) ++lead;
    const Located value{trim(raw), line_no, eq + 2 + lead};
    if (key.empty()) throw ParseError("missing key", line_no, indent + 1);
    if (value.text.empty()) throw ParseError("missing value for '" + key + "'", line_no, eq + 2);
    if (!keys_in_section.insert(key).second)
      throw ParseError("duplicate key '" + key + "'", line_no, indent + 1);

    if (section == "system") {
      system_keys.emplace(key, value);
    } else if (section == "matrices") {
      matrix_defs.emplace_back(key, value);
    } else if (section == "generator") {
      generator_defs.emplace_back(key, value);
    } else if (section == "expressions") {
      if (!is_identifier(key)) throw ParseError("bad expression name '" + key + "'", line_no, indent + 1);
      sc.expressions.push_back({key, std::string(value.text), value.line, value.column});
    } else if (section == "expect") {
      expect_defs.emplace_back(key, value);
    } else {
      threshold_defs.emplace_back(key, value);
    }
    if (eol == text.size()) break;
  }

  // [system]
  for (const auto& [key, v] : system_keys) {
    if (key == "dim") {
      sc.dim = parse_number<int>(v, "an integer");
      if (sc.dim < 1 || sc.dim > 8) v.fail("dim must be in 1..8");
      have_dim = true;
    } else if (key == "labels") {
      for (const auto& item : split_list(v)) {
        if (!is_identifier(item.text)) item.fail("bad label '" + std::string(item.text) + "'");
        const std::string l(item.text);
        if (l == "t" || l == "expm" || l == "concat") item.fail("'" + l + "' is reserved");
        if (std::find(sc.labels.begin(), sc.labels.end(), l) != sc.labels.end())
          item.fail("duplicate label '" + l + "'");
        sc.labels.push_back(l);
      }
      have_labels = true;
    } else if (key == "horizon") {
      sc.horizon = positive(v, "horizon");
    } else if (key == "schedule") {
      try {
        sc.schedule = Schedule::parse(v.text);
      } catch (const ParseError& e) {
        v.fail(e.what());
      }
    } else if (key == "seed") {
      sc.seed = parse_number<std::uint64_t>(v, "an unsigned integer");
    } else if (key == "threads") {
      sc.threads = parse_number<unsigned>(v, "an unsigned integer");
      if (sc.threads == 0) v.fail("threads must be >= 1");
    } else if (key == "zeta") {
      if (!is_identifier(v.text)) v.fail("bad label");
      sc.zeta_label = std::string(v.text);
    } else if (key == "fock_crosscheck") {
      sc.fock_crosscheck = parse_bool(v);
    } else {
      throw ParseError("unknown [system] key '" + key + "'", v.line, 1);
    }
  }
  if (!have_dim) throw ParseError("[system] needs dim");
  if (!have_labels) throw ParseError("[system] needs labels");
  if (sc.schedule.kind() == Schedule::Kind::random && sc.schedule.seed() == 0)
    sc.schedule = sc.schedule.with_seed(sc.seed);
  auto is_label = [&](std::string_view l) {
    return std::find(sc.labels.begin(), sc.labels.end(), l) != sc.labels.end();
  };

  // [matrices]
  for (const auto& [key, v] : matrix_defs) {
    if (!is_identifier(key) || key == "t" || key == "expm" || key == "concat" || is_label(key))
      throw ParseError("bad matrix name '" + key + "'", v.line, 1);
    Matrix m = parse_matrix(v);
    if (m.rows() != sc.dim || m.cols() != sc.dim)
      v.fail("matrix '" + key + "' must be " + std::to_string(sc.dim) + "x" + std::to_string(sc.dim));
    sc.matrices.push_back({key, std::move(m)});
  }
  auto is_matrix = [&](std::string_view n) {
    return std::any_of(sc.matrices.begin(), sc.matrices.end(), [&](auto& m) { return m.name == n; });
  };

  // [generator]
  bool have_kind = false;
  for (const auto& [key, v] : generator_defs) {
    if (key == "kind") {
      have_kind = true;
      if (v.text == "ce") sc.generator.kind = GeneratorSpec::Kind::ce;
      else if (v.text == "kernel") sc.generator.kind = GeneratorSpec::Kind::kernel;
      else if (v.text == "covariance") sc.generator.kind = GeneratorSpec::Kind::covariance;
      else v.fail("kind must be ce, kernel or covariance");
    }
  }
  if (!have_kind) throw ParseError("[generator] needs kind");
  for (const auto& [key, v] : generator_defs) {
    if (key == "kind") continue;
    const auto kind = sc.generator.kind;
    if (kind == GeneratorSpec::Kind::ce && (key.rfind("eta.", 0) == 0 || key.rfind("beta.", 0) == 0)) {
      const bool is_eta = key[0] == 'e';
      const std::string label = key.substr(is_eta ? 4 : 5);
      if (!is_label(label)) throw ParseError("unknown label '" + label + "'", v.line, 1);
      std::vector<std::string> names;
      for (const auto& item : split_list(v)) {
        if (!is_matrix(item.text)) item.fail("unknown matrix '" + std::string(item.text) + "'");
        names.emplace_back(item.text);
      }
      if (is_eta) {
        sc.generator.eta.emplace_back(label, std::move(names));
      } else {
        if (names.size() != 1) v.fail("beta takes one matrix");
        sc.generator.beta.emplace_back(label, names.front());
      }
    } else if (kind == GeneratorSpec::Kind::kernel && key == "file") {
      sc.generator.kernel_file = std::string(v.text);
    } else if (kind == GeneratorSpec::Kind::covariance && key == "gamma") {
      if (sc.dim != 1) v.fail("covariance generators need dim = 1");
      sc.generator.gamma = parse_matrix(v);
      const auto n = static_cast<Eigen::Index>(sc.labels.size());
      if (sc.generator.gamma.rows() != n || sc.generator.gamma.cols() != n)
        v.fail("gamma must be " + std::to_string(n) + "x" + std::to_string(n));
    } else {
      throw ParseError("unexpected [generator] key '" + key + "'", v.line, 1);
    }
  }
  if (sc.generator.kind == GeneratorSpec::Kind::kernel && sc.generator.kernel_file.empty())
    throw ParseError("[generator] kind = kernel needs file");
  if (sc.generator.kind == GeneratorSpec::Kind::covariance && sc.generator.gamma.size() == 0)
    throw ParseError("[generator] kind = covariance needs gamma");

  // [expressions] are checked against the final context.
  const auto ctx = sc.context();
  for (const auto& e : sc.expressions) {
    if (is_label(e.name) || is_matrix(e.name))
      throw ParseError("expression name '" + e.name + "' shadows a label or matrix", e.line, 1);
    parse_expression(e.source, ctx, e.line, e.column);
  }

  // [expect]
  for (const auto& [key, v] : expect_defs) {
    Expectation ex;
    const auto vs = key.find(" vs ");
    ex.expression = std::string(trim(std::string_view(key).substr(0, vs)));
    if (vs != std::string::npos) ex.candidate = std::string(trim(std::string_view(key).substr(vs + 4)));
    if (std::none_of(sc.expressions.begin(), sc.expressions.end(),
                     [&](auto& e) { return e.name == ex.expression; }))
      throw ParseError("expectation for unknown expression '" + ex.expression + "'", v.line, 1);
    if (ex.candidate == sc.zeta_label) ex.candidate.clear();
    if (!ex.candidate.empty() && !is_label(ex.candidate))
      throw ParseError("unknown candidate unit '" + ex.candidate + "'", v.line, 1);
    const auto verdict = parse_verdict(v.text);
    if (!verdict) v.fail("verdict must be norm-convergent, weak-only or divergent");
    ex.verdict = *verdict;
    sc.expectations.push_back(ex);
  }

  // [thresholds]
  for (const auto& [key, v] : threshold_defs) {
    if (key == "norm_tol") sc.thresholds.norm_tol = positive(v, "norm_tol");
    else if (key == "min_rate") sc.thresholds.min_rate = positive(v, "min_rate");
    else if (key == "plateau") sc.thresholds.plateau = positive(v, "plateau");
    else throw ParseError("unknown [thresholds] key '" + key + "'", v.line, 1);
  }
  return sc;
}

Scenario read_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc;
  try {
    sc = parse_scenario(buf.str(), path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ":" + e.what());
  }
  sc.base_dir = path.parent_path();
  return sc;
}

std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream out;
  out << "[system]\n";
  out << "dim = " << sc.dim << "\n";
  out << "labels = ";
  for (std::size_t i = 0; i < sc.labels.size(); ++i) out << (i ? ", " : "") << sc.labels[i];
  out << "\nhorizon = " << g17(sc.horizon) << "\n";
  out << "schedule = " << sc.schedule.to_string() << "\n";
  out << "seed = " << sc.seed << "\n";
  out << "threads = " << sc.threads << "\n";
  out << "zeta = " << sc.zeta_label << "\n";
  out << "fock_crosscheck = " << (sc.fock_crosscheck ? "true" : "false") << "\n";

  if (!sc.matrices.empty()) {
    out << "\n[matrices]\n";
    for (const auto& m : sc.matrices) out << m.name << " = " << format_matrix(m.value) << "\n";
  }

  out << "\n[generator]\n";
  const auto& g = sc.generator;
  switch (g.kind) {
    case GeneratorSpec::Kind::ce:
      out << "kind = ce\n";
      for (const auto& [label, names] : g.eta) {
        out << "eta." << label << " = ";
        for (std::size_t i = 0; i < names.size(); ++i) out << (i ? ", " : "") << names[i];
        out << "\n";
      }
      for (const auto& [label, name] : g.beta) out << "beta." << label << " = " << name << "\n";
      break;
    case GeneratorSpec::Kind::kernel:
      out << "kind = kernel\nfile = " << g.kernel_file << "\n";
      break;
    case GeneratorSpec::Kind::covariance:
      out << "kind = covariance\ngamma = " << format_matrix(g.gamma) << "\n";
      break;
  }

  if (!sc.expressions.empty()) {
    out << "\n[expressions]\n";
    for (const auto& e : sc.expressions) out << e.name << " = " << e.source << "\n";
  }
  if (!sc.expectations.empty()) {
    out << "\n[expect]\n";
    for (const auto& ex : sc.expectations) {
      out << ex.expression;
      if (!ex.candidate.empty()) out << " vs " << ex.candidate;
      out << " = " << to_string(ex.verdict) << "\n";
    }
  }
  out << "\n[thresholds]\n";
  out << "norm_tol = " << g17(sc.thresholds.norm_tol) << "\n";
  out << "min_rate = " << g17(sc.thresholds.min_rate) << "\n";
  out << "plateau = " << g17(sc.thresholds.plateau) << "\n";
  return out.str();
}

}  // namespace unitlab
