#include "unitlab/trotter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <thread>

#include "detail/segments.hpp"
#include "unitlab/rng.hpp"

namespace unitlab {

namespace {

constexpr std::size_t kCacheLimit = 1 << 14;

struct ResolvedTerm {
  const Term* term = nullptr;
  std::vector<std::size_t> labels;
  std::vector<double> ends;
};

std::vector<ResolvedTerm> resolve(const UnitExpression& e, const OperatorKernel& kernel) {
  e.validate(kernel);
  std::vector<ResolvedTerm> out;
  for (const auto& t : e.terms()) {
    ResolvedTerm r;
    r.term = &t;
    for (const auto& s : t.segments) r.labels.push_back(kernel.index_of(s.label));
    r.ends = detail::segment_ends(t);
    out.push_back(std::move(r));
  }
  return out;
}

using Grid = std::vector<std::vector<Superoperator>>;

// One side (x or y) of a pairing walking down its partition.
struct Side {
  std::vector<double> cuts;  // ascending, cuts.back() = total length
  std::size_t interval = 0;  // index into cuts of the current interval's top
  std::vector<Matrix> open;   // a e^{L beta} per term (left factors)
  std::vector<Matrix> close;  // e^{L beta} b per term (right factors)
  double top = 0.0;
  double length = 0.0;

  double bottom() const { return interval == 0 ? 0.0 : cuts[interval - 1]; }

  void enter(std::size_t index, const std::vector<ResolvedTerm>& terms) {
    interval = index;
    top = cuts[index];
    length = top - bottom();
    open.clear();
    close.clear();
    for (const auto& t : terms) {
      open.push_back(t.term->left_factor(length));
      close.push_back(t.term->right_factor(length));
    }
  }
};

}  // namespace

PairingEngine::PairingEngine(const CpdSemigroup& system) : system_(&system) {}

const Superoperator& PairingEngine::unit_map(std::size_t row, std::size_t col, double width) {
  const auto key = std::make_tuple(row, col, width);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (cache_.size() >= kCacheLimit) cache_.clear();
  return cache_.emplace(key, system_->entry(row, col, width)).first->second;
}

Superoperator PairingEngine::pairing(const UnitExpression& x, const Partition& xs,
                                     const UnitExpression& y, const Partition& ys) {
  const OperatorKernel& q = system_->generator();
  const auto xt = resolve(x, q);
  const auto yt = resolve(y, q);
  const int d = q.dim();

  Side sx, sy;
  sx.cuts = xs.cut_points();
  sy.cuts = ys.cut_points();
  const double total = sx.cuts.back();
  const double eps = 1e-12 * std::max(1.0, total);
  if (std::abs(total - sy.cuts.back()) > eps)
    throw DomainError("eval_pairing: partitions of different length");
  sy.cuts.back() = total;

  // Piece boundaries, descending from total to 0.
  std::vector<double> bounds;
  std::merge(sx.cuts.begin(), sx.cuts.end(), sy.cuts.begin(), sy.cuts.end(),
             std::back_inserter(bounds));
  bounds.insert(bounds.begin(), 0.0);
  std::vector<double> merged;
  for (double b : bounds)
    if (merged.empty() || b - merged.back() > eps) merged.push_back(b);
  merged.back() = total;
  std::reverse(merged.begin(), merged.end());

  sx.enter(sx.cuts.size() - 1, xt);
  sy.enter(sy.cuts.size() - 1, yt);

  const std::size_t np = xt.size();
  const std::size_t nq = yt.size();
  Grid grid(np, std::vector<Superoperator>(nq));
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t r = 0; r < nq; ++r)
      grid[p][r] = Superoperator::sandwich(sx.open[p].adjoint(), sy.open[r]);

  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double hi = merged[k];
    const double lo = merged[k + 1];
    for (std::size_t p = 0; p < np; ++p)
      for (std::size_t r = 0; r < nq; ++r) {
        const detail::TermPlacement px{&xt[p].ends, sx.top, sx.length};
        const detail::TermPlacement py{&yt[r].ends, sy.top, sy.length};
        Matrix acc = grid[p][r].rep();
        for (const auto& piece : detail::overlaps(px, py, lo, hi))
          acc = unit_map(xt[p].labels[piece.x_segment], yt[r].labels[piece.y_segment],
                         piece.width)
                    .rep() *
                acc;
        grid[p][r] = Superoperator(std::move(acc));
      }

    if (lo <= eps) break;  // final closing happens below

    if (std::abs(lo - sx.bottom()) <= eps) {
      std::vector<Superoperator> summed(nq, Superoperator::zero(d));
      for (std::size_t p = 0; p < np; ++p)
        for (std::size_t r = 0; r < nq; ++r)
          summed[r] += compose(Superoperator::left(sx.close[p].adjoint()), grid[p][r]);
      sx.enter(sx.interval - 1, xt);
      for (std::size_t p = 0; p < np; ++p)
        for (std::size_t r = 0; r < nq; ++r)
          grid[p][r] = compose(Superoperator::left(sx.open[p].adjoint()), summed[r]);
    }
    if (std::abs(lo - sy.bottom()) <= eps) {
      std::vector<Superoperator> summed(np, Superoperator::zero(d));
      for (std::size_t p = 0; p < np; ++p)
        for (std::size_t r = 0; r < nq; ++r)
          summed[p] += compose(Superoperator::right(sy.close[r]), grid[p][r]);
      sy.enter(sy.interval - 1, yt);
      for (std::size_t p = 0; p < np; ++p)
        for (std::size_t r = 0; r < nq; ++r)
          grid[p][r] = compose(Superoperator::right(sy.open[r]), summed[p]);
    }
  }

  Superoperator result = Superoperator::zero(d);
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t r = 0; r < nq; ++r)
      result += compose(Superoperator::sandwich(sx.close[p].adjoint(), sy.close[r]), grid[p][r]);
  return result;
}

Superoperator eval_pairing(const UnitExpression& x, const Partition& xs, const UnitExpression& y,
                           const Partition& ys, const CpdSemigroup& system) {
  PairingEngine engine(system);
  return engine.pairing(x, xs, y, ys);
}

// ---------------------------------------------------------------- schedules

Schedule Schedule::dyadic(int min_exponent, int max_exponent) {
  if (min_exponent < 0 || max_exponent < min_exponent || max_exponent > 24)
    throw DomainError("dyadic schedule needs 0 <= MIN <= MAX <= 24");
  Schedule s;
  s.kind_ = Kind::dyadic;
  s.min_exponent_ = min_exponent;
  s.max_exponent_ = max_exponent;
  return s;
}

Schedule Schedule::random(std::size_t count, std::uint64_t seed) {
  if (count == 0 || count > 16) throw DomainError("random schedule needs 1 <= COUNT <= 16");
  Schedule s;
  s.kind_ = Kind::random;
  s.count_ = count;
  s.seed_ = seed;
  return s;
}

Schedule Schedule::with_seed(std::uint64_t seed) const {
  Schedule s = *this;
  s.seed_ = seed;
  return s;
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError("schedule: bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

}  // namespace

Schedule Schedule::parse(std::string_view text) {
  const auto fields = split(text, ':');
  try {
    if (fields[0] == "dyadic" && fields.size() == 3)
      return dyadic(parse_number<int>(fields[1], "MIN"), parse_number<int>(fields[2], "MAX"));
    if (fields[0] == "random" && (fields.size() == 2 || fields.size() == 3)) {
      const auto seed = fields.size() == 3 ? parse_number<std::uint64_t>(fields[2], "SEED") : 0;
      return random(parse_number<std::size_t>(fields[1], "COUNT"), seed);
    }
  } catch (const DomainError& e) {
    throw ParseError(std::string("schedule: ") + e.what());
  }
  throw ParseError("schedule must be dyadic:MIN:MAX or random:COUNT[:SEED], got '" +
                   std::string(text) + "'");
}

std::string Schedule::to_string() const {
  if (kind_ == Kind::dyadic)
    return "dyadic:" + std::to_string(min_exponent_) + ":" + std::to_string(max_exponent_);
  return "random:" + std::to_string(count_) + ":" + std::to_string(seed_);
}

std::vector<Partition> Schedule::materialize(double horizon) const {
  if (!(horizon > 0.0)) throw DomainError("schedule horizon must be positive");
  std::vector<Partition> out;
  if (kind_ == Kind::dyadic) {
    for (int e = min_exponent_; e <= max_exponent_; ++e)
      out.push_back(Partition::uniform(horizon, std::size_t{1} << e));
    return out;
  }
  Rng rng(seed_);
  std::vector<double> cuts{1.0};
  for (std::size_t k = 0; k < count_; ++k) {
    const std::size_t fresh = std::size_t{1} << (k + 3);
    for (std::size_t i = 0; i < fresh; ++i) cuts.push_back(rng.uniform(1e-9, 1.0 - 1e-9));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<double> scaled;
    scaled.reserve(cuts.size());
    for (double c : cuts) scaled.push_back(c * horizon);
    scaled.back() = horizon;
    out.push_back(Partition::from_cut_points(scaled));
  }
  return out;
}

// ----------------------------------------------------------------- verdicts

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::norm_convergent: return "norm-convergent";
    case Verdict::weak_only: return "weak-only";
    case Verdict::divergent: return "divergent";
  }
  return "divergent";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  for (auto v : {Verdict::norm_convergent, Verdict::weak_only, Verdict::divergent})
    if (to_string(v) == text) return v;
  return std::nullopt;
}

namespace {

constexpr double kRoundoffFloor = 1e-12;

double fit_rate(const std::vector<ReportRow>& rows, double ReportRow::*field) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (r.*field > kRoundoffFloor && r.mesh > 0.0) pts.emplace_back(std::log(r.mesh), std::log(r.*field));
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

// Last three members are uniform with 1, 2, 4 times the parts.
bool dyadic_tail(const std::vector<ReportRow>& rows, double horizon) {
  if (rows.size() < 3) return false;
  const std::size_t n = rows.size();
  for (std::size_t k = n - 3; k < n; ++k) {
    const double covered = rows[k].mesh * static_cast<double>(rows[k].parts);
    if (std::abs(covered - horizon) > 1e-9 * std::max(1.0, horizon)) return false;
  }
  return rows[n - 2].parts == 2 * rows[n - 3].parts && rows[n - 1].parts == 2 * rows[n - 2].parts;
}

template <typename T>
T richardson(const T& coarse, const T& middle, const T& fine) {
  // v(n) = L + c/n + e/n^2 + ...; two elimination steps.
  const T r1 = 2.0 * middle - coarse;
  const T r2 = 2.0 * fine - middle;
  return (4.0 * r2 - r1) * (1.0 / 3.0);
}

}  // namespace

void classify(ConvergenceReport& report) {
  auto& rows = report.rows;
  if (rows.empty()) {
    report.verdict = Verdict::divergent;
    report.notes.push_back("empty schedule");
    return;
  }
  report.criterion_rate = fit_rate(rows, &ReportRow::criterion_defect);
  report.gram_rate = fit_rate(rows, &ReportRow::gram_defect);
  report.norm_rate = fit_rate(rows, &ReportRow::norm_defect);

  if (report.limit_method.empty()) {
    if (dyadic_tail(rows, report.horizon)) {
      const std::size_t n = rows.size();
      auto extrapolate = [&](double ReportRow::*f) {
        return std::abs(richardson(rows[n - 3].*f, rows[n - 2].*f, rows[n - 1].*f));
      };
      report.criterion_limit = extrapolate(&ReportRow::criterion_defect);
      report.gram_limit = extrapolate(&ReportRow::gram_defect);
      report.norm_limit = extrapolate(&ReportRow::norm_defect);
      report.ambient_limit = extrapolate(&ReportRow::ambient_defect);
      report.limit_method = "richardson";
    } else {
      const auto& last = rows.back();
      report.criterion_limit = last.criterion_defect;
      report.gram_limit = last.gram_defect;
      report.norm_limit = std::abs(last.norm_defect);
      report.ambient_limit = last.ambient_defect;
      report.limit_method = "finest";
    }
  }

  report.max_identity_residual = 0.0;
  report.min_norm_defect = std::numeric_limits<double>::infinity();
  bool criterion_exact = true;
  bool gram_exact = true;
  for (const auto& r : rows) {
    const double scale = std::max(1.0, r.gram_norm);
    criterion_exact = criterion_exact && r.criterion_defect <= kRoundoffFloor * scale;
    gram_exact = gram_exact && r.gram_defect <= kRoundoffFloor * scale;
    report.max_identity_residual = std::max(report.max_identity_residual, r.identity_residual);
    report.min_norm_defect = std::min(report.min_norm_defect, r.norm_defect_min);
  }
  report.exact = criterion_exact && gram_exact;
  report.sequence_suffices =
      criterion_exact || (!std::isnan(report.criterion_rate) && report.criterion_rate >= 0.9);

  if (rows.size() < 3) {
    report.cauchy = true;
  } else {
    const double first = rows[1].increment;
    const double last = rows.back().increment;
    report.cauchy = last <= report.thresholds.norm_tol || last < first;
  }

  const auto& th = report.thresholds;
  const bool rate_ok =
      criterion_exact || (!std::isnan(report.criterion_rate) && report.criterion_rate >= th.min_rate);
  const double tol = th.norm_tol * std::max(1.0, report.scale);
  if (report.criterion_limit < tol && report.gram_limit < tol && rate_ok) {
    report.verdict = Verdict::norm_convergent;
  } else if (report.ambient_limit < tol &&
             std::max(report.criterion_limit, report.norm_limit) > th.plateau) {
    report.verdict = Verdict::weak_only;
  } else {
    report.verdict = Verdict::divergent;
  }

  if (report.sequence_suffices)
    report.notes.push_back("criterion defect is O(mesh): uniform sequences suffice");
  report.notes.push_back(
      "the verdict certifies or refutes <c, y_t> -> <c, c> only; subsystem membership is not "
      "checked structurally");
}

// ------------------------------------------------------------ assessment

namespace {

struct MemberResult {
  ReportRow row;
  Superoperator gram, criterion, criterion_adjoint;
  std::vector<Superoperator> ambient;
};

MemberResult assess_member(PairingEngine& engine, const UnitExpression& y, const Partition& part,
                           std::size_t candidate, const std::vector<std::size_t>& ambient) {
  const CpdSemigroup& system = engine.system();
  const OperatorKernel& q = system.generator();
  const int d = q.dim();
  const double length = part.length();
  const Partition whole({length});
  const UnitExpression c = UnitExpression::unit(q.labels()[candidate], d);

  MemberResult m;
  m.gram = engine.pairing(y, part, y, part);
  m.criterion = engine.pairing(c, whole, y, part);
  m.criterion_adjoint = engine.pairing(y, part, c, whole);
  const Superoperator z = system.entry(candidate, candidate, length);

  const Matrix one = identity_element(d);
  const Matrix g1 = m.gram(one);
  const Matrix c1 = m.criterion(one);
  const Matrix ca1 = m.criterion_adjoint(one);
  const Matrix z1 = z(one);
  // <y - c, y - c> = <y,y> - <y,c> - <c,y> + <c,c>
  const Matrix expansion = g1 - ca1 - c1 + z1;
  const Matrix via_real_part = g1 - (c1 + c1.adjoint()) + z1;
  const Matrix herm = 0.5 * (expansion + expansion.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(herm, Eigen::EigenvaluesOnly);

  m.row.parts = part.size();
  m.row.mesh = part.norm();
  m.row.gram_defect = superop_norm(m.gram - z);
  m.row.criterion_defect = superop_norm(m.criterion - z);
  m.row.norm_defect = eig.eigenvalues()(d - 1);
  m.row.norm_defect_min = eig.eigenvalues()(0);
  m.row.identity_residual = element_norm(expansion - via_real_part);
  m.row.gram_norm = superop_norm(m.gram);
  for (std::size_t a : ambient) {
    const UnitExpression xi = UnitExpression::unit(q.labels()[a], d);
    m.ambient.push_back(engine.pairing(xi, whole, y, part));
    m.row.ambient_defect = std::max(
        m.row.ambient_defect, superop_norm(m.ambient.back() - system.entry(a, candidate, length)));
  }
  return m;
}

}  // namespace

ConvergenceReport assess_candidate(const UnitExpression& y, const CpdSemigroup& system,
                                   const std::string& candidate, double horizon,
                                   const std::vector<Partition>& schedule,
                                   const ConvergenceOptions& options) {
  const OperatorKernel& q = system.generator();
  y.validate(q);
  const std::size_t c = q.index_of(candidate);
  std::vector<std::size_t> ambient;
  if (options.ambient.empty()) {
    for (std::size_t i = 0; i < q.size(); ++i)
      if (i != c) ambient.push_back(i);
  } else {
    for (const auto& a : options.ambient) ambient.push_back(q.index_of(a));
  }
  for (const auto& p : schedule)
    if (std::abs(p.length() - horizon) > 1e-12 * std::max(1.0, horizon))
      throw DomainError("schedule member does not partition [0, horizon]");

  std::vector<MemberResult> results(schedule.size());
  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(schedule.size())));
  auto work = [&](unsigned worker) {
    PairingEngine engine(system);
    for (std::size_t k = worker; k < schedule.size(); k += threads)
      results[k] = assess_member(engine, y, schedule[k], c, ambient);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  ConvergenceReport report;
  report.horizon = horizon;
  report.expression = options.expression_name;
  report.candidate = candidate;
  report.seed = options.seed;
  report.thresholds = options.thresholds;
  report.scale = std::max(1.0, superop_norm(system.entry(c, c, horizon)));
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (k > 0) results[k].row.increment = superop_norm(results[k].criterion - results[k - 1].criterion);
    report.rows.push_back(results[k].row);
  }

  if (dyadic_tail(report.rows, horizon)) {
    // Extrapolate the maps themselves, then measure.
    const std::size_t n = results.size();
    const auto& a = results[n - 3];
    const auto& b = results[n - 2];
    const auto& f = results[n - 1];
    const Superoperator z = system.entry(c, c, horizon);
    const Matrix one = identity_element(q.dim());
    const Superoperator gram = richardson(a.gram, b.gram, f.gram);
    const Superoperator crit = richardson(a.criterion, b.criterion, f.criterion);
    const Superoperator crit_adj = richardson(a.criterion_adjoint, b.criterion_adjoint,
                                              f.criterion_adjoint);
    report.gram_limit = superop_norm(gram - z);
    report.criterion_limit = superop_norm(crit - z);
    const Matrix nd = gram(one) - crit_adj(one) - crit(one) + z(one);
    report.norm_limit = element_norm(0.5 * (nd + nd.adjoint()));
    report.ambient_limit = 0.0;
    for (std::size_t i = 0; i < ambient.size(); ++i) {
      const Superoperator lim = richardson(a.ambient[i], b.ambient[i], f.ambient[i]);
      report.ambient_limit = std::max(
          report.ambient_limit, superop_norm(lim - system.entry(ambient[i], c, horizon)));
    }
    report.limit_method = "richardson";
  } else if (!results.empty()) {
    const auto& last = report.rows.back();
    report.criterion_limit = last.criterion_defect;
    report.gram_limit = last.gram_defect;
    report.norm_limit = std::abs(last.norm_defect);
    report.ambient_limit = last.ambient_defect;
    report.limit_method = "finest";
  }
  classify(report);
  return report;
}

ConvergenceReport convergence_verdict(const UnitExpression& y, const ExtendedGenerator& extension,
                                      double horizon, const std::vector<Partition>& schedule,
                                      const ConvergenceOptions& options) {
  const CpdSemigroup system(extension.assembled);
  ConvergenceOptions opts = options;
  if (opts.ambient.empty()) opts.ambient = extension.base.labels();
  return assess_candidate(y, system, extension.zeta_label, horizon, schedule, opts);
}

ConvergenceReport convergence_verdict(const UnitExpression& y, const OperatorKernel& generator,
                                      double horizon, const Schedule& schedule,
                                      const ConvergenceOptions& options,
                                      const ExtensionOptions& extension) {
  const ExtendedGenerator ext = extend_generator(y, generator, extension);
  ConvergenceReport report =
      convergence_verdict(y, ext, horizon, schedule.materialize(horizon), options);
  report.schedule = schedule.to_string();
  return report;
}

// ------------------------------------------------------------ gram estimate

BoundReport gram_bound_check(const UnitExpression& y, const CpdSemigroup& system,
                               const std::string& candidate, double horizon,
                               const Schedule& schedule) {
  const OperatorKernel& q = system.generator();
  const std::size_t c = q.index_of(candidate);
  const int d = q.dim();
  const Superoperator& k = q.at(c, c);
  PairingEngine engine(system);

  BoundReport report;
  report.k_norm = superop_norm(k);

  std::vector<std::pair<double, std::vector<Partition>>> members;
  double widest = 1e-1;
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    const double h = frac * horizon;
    auto parts = schedule.materialize(h);
    for (const auto& p : parts) widest = std::max(widest, p.norm());
    members.emplace_back(h, std::move(parts));
  }

  constexpr int kSamples = 16;
  const Superoperator id = Superoperator::identity(d);
  double at_small = 0.0, at_large = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double s = 1e-4 * std::pow(widest / 1e-4, static_cast<double>(i) / (kSamples - 1));
    const Superoperator ys = engine.pairing(y, Partition({s}), y, Partition({s}));
    const double r = superop_norm(ys - id - s * k) / (s * s);
    report.m_samples.emplace_back(s, r);
    report.m_estimate = std::max(report.m_estimate, r);
    if (i == 0) at_small = r;
    if (s >= 1e-2) at_large = std::max(at_large, r);
  }
  report.m_stable = at_small <= 10.0 * at_large + 1e-8;

  const double rate = std::max(report.k_norm, report.m_estimate);
  report.all_hold = true;
  report.all_bounded = true;
  for (const auto& [h, parts] : members) {
    const Superoperator z = superop_exp(k, h);
    for (const auto& p : parts) {
      BoundRow row;
      row.horizon = h;
      row.parts = p.size();
      row.mesh = p.norm();
      const Superoperator g = engine.pairing(y, p, y, p);
      row.gram_defect = superop_norm(g - z);
      const double m_prime =
          report.m_estimate + report.k_norm * report.k_norm * std::exp(row.mesh * report.k_norm);
      row.bound = row.mesh * h * std::exp(h * rate) * m_prime;
      row.holds = row.gram_defect <= row.bound * (1.0 + 1e-9) + 1e-12;
      row.gram_norm = superop_norm(g);
      row.growth_bound = std::exp(h * rate);
      row.bounded = row.gram_norm <= row.growth_bound * (1.0 + 1e-9) + 1e-12;
      report.all_hold = report.all_hold && row.holds;
      report.all_bounded = report.all_bounded && row.bounded;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace unitlab
