#include "mollify/mollifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <sstream>
#include <thread>

#include "mollify/summation.hpp"

namespace mollify::mollifiers {

namespace nt = numtheory;

const char* variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::OnePiece: return "one-piece";
    case Variant::TwistedTwoPiece: return "twisted-two-piece";
    case Variant::BuiType: return "bui-type";
  }
  return "?";
}

double Polynomial::operator()(double x) const noexcept {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

namespace {

cd lookup(const CoefMap& m, std::uint64_t a, std::uint64_t b) {
  auto it = m.find({a, b});
  return it == m.end() ? cd(0.0) : it->second;
}

void check_length(double y) {
  if (!(y >= 2.0)) throw DomainError("mollifier length must be at least 2");
}

CoefMap is_map(double y) {
  const double ly = std::log(y);
  CoefMap m;
  for (std::uint64_t b = 1; double(b) <= y; ++b) {
    const int mu = nt::mobius(b);
    if (mu == 0) continue;
    const double v = mu * (1.0 - std::log(double(b)) / ly);
    if (v != 0.0) m[{1, b}] = v;
  }
  return m;
}

bool one_piece_shape(const CoefMap& m) {
  for (const auto& [k, v] : m)
    if (k.first != 1) return false;
  return true;
}

CoefMap combine(const CoefMap& a, const CoefMap& b, cd ub) {
  CoefMap r = a;
  for (const auto& [k, v] : b) r[k] += ub * v;
  return r;
}

}  // namespace

cd MollifierSpec::x(std::uint64_t a, std::uint64_t b) const { return lookup(plain, a, b); }
cd MollifierSpec::y(std::uint64_t a, std::uint64_t b) const { return lookup(twisted, a, b); }

MollifierSpec iwaniec_sarnak(double y) {
  check_length(y);
  MollifierSpec s;
  s.variant = Variant::OnePiece;
  s.plain = is_map(y);
  s.length = y;
  s.normalized = true;
  return s;
}

MollifierSpec michel_vanderkam(double y, double alpha) { return michel_vanderkam(y, y, alpha); }

MollifierSpec michel_vanderkam(double y1, double y2, double alpha) {
  check_length(y1);
  check_length(y2);
  MollifierSpec s;
  s.variant = Variant::TwistedTwoPiece;
  s.plain = is_map(y1);
  s.twisted = is_map(y2);
  s.length = y1;
  s.twisted_length = y2;
  s.alpha = alpha;
  s.normalized = true;
  return s;
}

MollifierSpec bui(double y, const Polynomial& p1, const Polynomial& p2, double logscale) {
  check_length(y);
  if (p1(0.0) != 0.0 || p2(0.0) != 0.0) throw PreconditionError("Bui polynomials must vanish at 0");
  if (!(logscale > 0.0)) throw DomainError("logscale must be positive");
  const double ly = std::log(y);
  MollifierSpec s;
  s.variant = Variant::BuiType;
  s.length = y;
  for (std::uint64_t b = 1; double(b) <= y; ++b) {
    const int mu = nt::mobius(b);
    if (mu == 0) continue;
    const double v1 = mu * p1(std::log(y / double(b)) / ly);
    if (v1 != 0.0) s.plain[{1, b}] += v1;
    for (std::uint64_t a = 2; double(a * b) <= y; ++a) {
      const double lam = nt::von_mangoldt(a);
      if (lam == 0.0) continue;
      const double v2 = lam / logscale * mu * p2(std::log(y / double(a * b)) / ly);
      if (v2 != 0.0) s.plain[{a, b}] += v2;
    }
  }
  return s;
}

MollifierSpec one_piece(const std::map<std::uint64_t, cd>& x, double y) {
  MollifierSpec s;
  s.variant = Variant::OnePiece;
  s.length = y;
  for (const auto& [b, v] : x) {
    if (b == 0) throw DomainError("coefficient index must be positive");
    if (double(b) > y) throw DomainError("coefficient beyond the declared length");
    if (v != cd(0.0)) s.plain[{1, b}] = v;
  }
  s.normalized = s.x(1, 1) == cd(1.0);
  return s;
}

MollifierSpec bui_type(CoefMap z, double y) {
  for (auto it = z.begin(); it != z.end();) {
    const auto [a, b] = it->first;
    if (a == 0 || b == 0) throw DomainError("coefficient index must be positive");
    if (double(a) * double(b) > y) throw DomainError("coefficient beyond the declared length");
    it = it->second == cd(0.0) ? z.erase(it) : std::next(it);
  }
  MollifierSpec s;
  s.variant = Variant::BuiType;
  s.plain = std::move(z);
  s.length = y;
  return s;
}

MollifierSpec two_piece(CoefMap x, CoefMap y, double y1, double y2, cd alpha) {
  MollifierSpec s;
  s.variant = Variant::TwistedTwoPiece;
  s.plain = bui_type(std::move(x), y1).plain;
  s.twisted = bui_type(std::move(y), y2).plain;
  s.length = y1;
  s.twisted_length = y2;
  s.alpha = alpha;
  return s;
}

MollifierSpec n0_reduce(const MollifierSpec& spec) {
  if (spec.variant != Variant::TwistedTwoPiece) throw PreconditionError("n0_reduce needs a twisted two-piece spec");
  if (spec.length != spec.twisted_length) throw PreconditionError("n0_reduce needs both parts to share their length");
  MollifierSpec s;
  s.variant = Variant::BuiType;
  s.plain = combine(spec.plain, spec.twisted, spec.alpha);
  s.length = spec.length;
  return s;
}

MollifierSpec project_coprime(const MollifierSpec& spec, std::uint64_t q) {
  auto keep = [q](const CoefMap& m) {
    CoefMap r;
    for (const auto& [k, v] : m)
      if (std::gcd(k.first, k.second) == 1 && std::gcd(k.first * k.second, q) == 1) r.emplace(k, v);
    return r;
  };
  MollifierSpec s = spec;
  s.plain = keep(spec.plain);
  s.twisted = keep(spec.twisted);
  return s;
}

MollifierSpec truncate(const MollifierSpec& spec, double length) {
  auto keep = [length](const CoefMap& m) {
    CoefMap r;
    for (const auto& [k, v] : m)
      if (double(k.first) * double(k.second) <= length) r.emplace(k, v);
    return r;
  };
  MollifierSpec s = spec;
  s.plain = keep(spec.plain);
  s.twisted = keep(spec.twisted);
  s.length = std::min(spec.length, length);
  if (s.has_twist()) s.twisted_length = std::min(spec.twisted_length, length);
  return s;
}

MollifierSpec scale(const MollifierSpec& spec, cd u) {
  MollifierSpec s = spec;
  for (auto& [k, v] : s.plain) v *= u;
  for (auto& [k, v] : s.twisted) v *= u;
  s.normalized = s.variant == Variant::OnePiece && s.x(1, 1) == cd(1.0);
  return s;
}

MollifierSpec operator+(const MollifierSpec& s1, const MollifierSpec& s2) {
  MollifierSpec s;
  s.plain = combine(s1.plain, s2.plain, 1.0);
  s.twisted = combine(CoefMap{}, s1.twisted, s1.alpha);
  s.twisted = combine(s.twisted, s2.twisted, s2.alpha);
  s.alpha = 1.0;
  s.length = std::max(s1.length, s2.length);
  s.twisted_length = std::max(s1.twisted_length, s2.twisted_length);
  if (!s.twisted.empty())
    s.variant = Variant::TwistedTwoPiece;
  else
    s.variant = one_piece_shape(s.plain) ? Variant::OnePiece : Variant::BuiType;
  s.normalized = s.variant == Variant::OnePiece && s.x(1, 1) == cd(1.0);
  return s;
}

namespace {

struct Term {
  std::uint64_t a, b;
  cd w;
};

std::vector<Term> terms(const CoefMap& m) {
  std::vector<Term> t;
  t.reserve(m.size());
  for (const auto& [k, v] : m) t.push_back({k.first, k.second, v / std::sqrt(double(k.first) * double(k.second))});
  return t;
}

// sum w conj(chi(a)) chi(b)
cd pair_sum(const std::vector<Term>& ts, const characters::DirichletCharacter& chi) {
  using characters::CharacterGroup;
  const auto& g = chi.group();
  const std::uint64_t L = g.exponent();
  CompensatedSum<cd> s;
  for (const auto& t : ts) {
    const std::uint64_t pa = chi.phase(t.a);
    if (pa == CharacterGroup::kNonUnit) continue;
    const std::uint64_t pb = chi.phase(t.b);
    if (pb == CharacterGroup::kNonUnit) continue;
    s += t.w * g.root((pb + L - pa) % L);
  }
  return s.value();
}

}  // namespace

cd evaluate(const MollifierSpec& spec, const characters::DirichletCharacter& chi, std::optional<cd> eps) {
  cd r = pair_sum(terms(spec.plain), chi);
  if (spec.has_twist()) {
    if (!eps) throw PreconditionError("twisted mollifier needs the root number");
    // chi(a) conj(chi(b)) = conj(conj(chi(a)) chi(b)); conjugate the coefficients to reuse pair_sum.
    CoefMap cm;
    for (const auto& [k, v] : spec.twisted) cm.emplace(k, std::conj(v));
    r += spec.alpha * std::conj(*eps) * std::conj(pair_sum(terms(cm), chi));
  }
  return r;
}

Eigen::VectorXcd evaluate_family(const MollifierSpec& spec, const characters::CharacterFamily& fam,
                                 unsigned workers) {
  const auto n = static_cast<Eigen::Index>(fam.size());
  Eigen::VectorXcd out(n);
  const auto tp = terms(spec.plain);
  CoefMap cm;
  for (const auto& [k, v] : spec.twisted) cm.emplace(k, std::conj(v));
  const auto tt = terms(cm);
  auto run = [&](Eigen::Index lo, Eigen::Index hi) {
    for (Eigen::Index i = lo; i < hi; ++i) {
      const auto& chi = fam.members[static_cast<std::size_t>(i)];
      cd r = pair_sum(tp, chi);
      if (!tt.empty()) r += spec.alpha * std::conj(fam.root_numbers[i]) * std::conj(pair_sum(tt, chi));
      out[i] = r;
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<Eigen::Index>(n, 1))));
  if (workers == 1) {
    run(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const Eigen::Index lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back(run, lo, hi);
  }
  for (auto& t : pool) t.join();
  return out;
}

CoefMap read_coefficients(std::istream& in) {
  CoefMap m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::uint64_t a, b;
    double re, im = 0.0;
    if (!(ls >> a)) continue;
    if (!(ls >> b >> re)) throw ConfigError("coefficient line " + std::to_string(lineno) + ": expected 'a b re [im]'");
    if (!(ls >> im)) im = 0.0;
    std::string extra;
    if (ls.clear(), ls >> extra) throw ConfigError("coefficient line " + std::to_string(lineno) + ": trailing fields");
    if (a == 0 || b == 0) throw ConfigError("coefficient line " + std::to_string(lineno) + ": indices must be positive");
    m[{a, b}] += cd(re, im);
  }
  return m;
}

CoefMap read_coefficient_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open coefficient file " + path);
  return read_coefficients(f);
}

void write_coefficients(std::ostream& out, const CoefMap& m) {
  out << std::setprecision(17);
  for (const auto& [k, v] : m) out << k.first << ' ' << k.second << ' ' << v.real() << ' ' << v.imag() << '\n';
}

}  // namespace mollify::mollifiers
