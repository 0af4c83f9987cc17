#include "mollify/characters.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include <unsupported/Eigen/FFT>

#include "mollify/summation.hpp"

namespace mollify::characters {

namespace nt = numtheory;

namespace {

std::uint64_t crt_lift(std::uint64_t g, std::uint64_t pe, std::uint64_t q) {
  // G = g mod pe, G = 1 mod q/pe.
  const std::uint64_t rest = q / pe;
  if (rest == 1) return g % q;
  const std::uint64_t inv = nt::invmod(rest % pe, pe);
  // G = 1 + rest * t with rest*t = g - 1 (mod pe).
  const std::uint64_t t = nt::mulmod((g + pe - 1) % pe, inv, pe);
  return (1 + rest * t) % q;
}

unsigned valuation(std::uint64_t k, std::uint64_t p) {
  unsigned v = 0;
  while (k % p == 0) {
    k /= p;
    ++v;
  }
  return v;
}

std::uint64_t ipow(std::uint64_t p, unsigned e) {
  std::uint64_t r = 1;
  while (e--) r *= p;
  return r;
}

}  // namespace

CharacterGroup::CharacterGroup(std::uint64_t q) : q_(q), phi_(nt::euler_phi(q)) {
  if (q == 0) throw DomainError("modulus must be positive");
  if (q > 0xfffffffeull) throw CapacityError("modulus too large");
  // Per-factor log tables on the p-part, stored as (factor index, table over Z/p^e).
  std::vector<std::vector<std::uint32_t>> local;
  for (auto [p, e] : nt::factorize(q)) {
    const std::uint64_t pe = ipow(p, e);
    if (p == 2) {
      if (e == 1) continue;
      if (e == 2) {
        factors_.push_back({2, 2, 4, 2, crt_lift(3, 4, q), false});
        std::vector<std::uint32_t> t(4, kNonUnit);
        t[1] = 0;
        t[3] = 1;
        local.push_back(std::move(t));
        continue;
      }
      const std::uint64_t n5 = pe / 4;
      factors_.push_back({2, e, pe, 2, crt_lift(pe - 1, pe, q), true});
      factors_.push_back({2, e, pe, n5, crt_lift(5, pe, q), false});
      std::vector<std::uint32_t> tm(pe, kNonUnit), t5(pe, kNonUnit);
      std::uint64_t x = 1;
      for (std::uint64_t b = 0; b < n5; ++b) {
        tm[x] = 0;
        t5[x] = static_cast<std::uint32_t>(b);
        tm[pe - x] = 1;
        t5[pe - x] = static_cast<std::uint32_t>(b);
        x = x * 5 % pe;
      }
      local.push_back(std::move(tm));
      local.push_back(std::move(t5));
      continue;
    }
    const std::uint64_t g = nt::primitive_root(p, e);
    const std::uint64_t ord = pe / p * (p - 1);
    factors_.push_back({p, e, pe, ord, crt_lift(g, pe, q), false});
    std::vector<std::uint32_t> t(pe, kNonUnit);
    std::uint64_t x = 1;
    for (std::uint64_t j = 0; j < ord; ++j) {
      t[x] = static_cast<std::uint32_t>(j);
      x = nt::mulmod(x, g, pe);
    }
    local.push_back(std::move(t));
  }
  for (const auto& f : factors_) L_ = std::lcm(L_, f.order);

  const std::size_t r = factors_.size();
  if (r > 0) {
    logs_.assign(static_cast<std::size_t>(q) * r, kNonUnit);
    for (std::uint64_t n = 0; n < q; ++n) {
      if (std::gcd(n, q) != 1) continue;
      for (std::size_t i = 0; i < r; ++i) logs_[n * r + i] = local[i][n % factors_[i].modulus];
    }
  }
  roots_.resize(L_);
  for (std::uint64_t k = 0; k < L_; ++k) {
    const double a = 2.0 * std::numbers::pi * double(k) / double(L_);
    roots_[k] = {std::cos(a), std::sin(a)};
  }
  if (r == 1) {
    powers_.resize(factors_[0].order);
    std::uint64_t x = 1;
    for (auto& v : powers_) {
      v = static_cast<std::uint32_t>(x);
      x = nt::mulmod(x, factors_[0].generator, q);
    }
  }
}

const std::vector<cd>& CharacterGroup::additive() const {
  std::call_once(additive_once_, [this] {
    additive_.resize(q_);
    for (std::uint64_t a = 0; a < q_; ++a) {
      const double t = 2.0 * std::numbers::pi * double(a) / double(q_);
      additive_[a] = {std::cos(t), std::sin(t)};
    }
  });
  return additive_;
}

std::shared_ptr<const CharacterGroup> group_for(std::uint64_t q) {
  static std::mutex mu;
  static std::map<std::uint64_t, std::weak_ptr<const CharacterGroup>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[q];
  if (auto g = slot.lock()) return g;
  auto g = std::make_shared<const CharacterGroup>(q);
  slot = g;
  return g;
}

DirichletCharacter::DirichletCharacter(std::shared_ptr<const CharacterGroup> g,
                                       std::vector<std::uint32_t> exps)
    : group_(std::move(g)), exps_(std::move(exps)) {
  const auto& fs = group_->factors();
  if (exps_.size() != fs.size()) throw std::invalid_argument("exponent vector has wrong length");
  const std::uint64_t L = group_->exponent();
  std::uint64_t radix = 1;
  mult_.resize(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (exps_[i] >= fs[i].order) throw std::invalid_argument("exponent out of range");
    mult_[i] = exps_[i] * (L / fs[i].order);
    id_ += exps_[i] * radix;
    radix *= fs[i].order;
  }
  const std::uint64_t q = group_->modulus();
  if (q > 2) parity_ = phase(q - 1) == 0 ? 1 : -1;

  // Conductor from the local exponents.
  conductor_ = 1;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& f = fs[i];
    const std::uint64_t k = exps_[i];
    if (f.p == 2 && f.e >= 3) {
      if (f.minus_one_part) continue;  // handled with the 5-part below
      const std::uint64_t a = exps_[i - 1];
      if (k == 0) {
        if (a != 0) conductor_ *= 4;
      } else {
        conductor_ *= ipow(2, f.e - valuation(k, 2));
      }
      continue;
    }
    if (k == 0) continue;
    if (f.p == 2) {
      conductor_ *= 4;
      continue;
    }
    const unsigned v = valuation(k, f.p);
    conductor_ *= ipow(f.p, f.e > v + 1 ? f.e - v : 1);
  }
}

DirichletCharacter DirichletCharacter::conj() const {
  std::vector<std::uint32_t> e(exps_.size());
  const auto& fs = group_->factors();
  for (std::size_t i = 0; i < e.size(); ++i)
    e[i] = exps_[i] == 0 ? 0 : static_cast<std::uint32_t>(fs[i].order - exps_[i]);
  DirichletCharacter c(group_, std::move(e));
  if (materialized()) c.materialize();
  return c;
}

void DirichletCharacter::materialize() {
  if (!table_.empty()) return;
  const std::uint64_t q = modulus();
  std::vector<cd> t(q);
  for (std::uint64_t a = 0; a < q; ++a) {
    const std::uint64_t ph = phase(a);
    t[a] = ph == CharacterGroup::kNonUnit ? cd(0.0, 0.0) : group_->root(ph);
  }
  table_ = std::move(t);
}

namespace {

template <typename Fn>
void for_each_exponent(const CharacterGroup& g, Fn&& fn) {
  const auto& fs = g.factors();
  std::vector<std::uint32_t> e(fs.size(), 0);
  for (;;) {
    fn(e);
    std::size_t i = 0;
    for (; i < e.size(); ++i) {
      if (++e[i] < fs[i].order) break;
      e[i] = 0;
    }
    if (i == e.size()) return;
  }
}

}  // namespace

std::vector<DirichletCharacter> enumerate_characters(std::uint64_t q) {
  auto g = group_for(q);
  std::vector<DirichletCharacter> out;
  out.reserve(g->group_order());
  for_each_exponent(*g, [&](const std::vector<std::uint32_t>& e) {
    out.emplace_back(g, e);
    if (q <= kMaterializeBound) out.back().materialize();
  });
  return out;
}

DirichletCharacter character_from_id(std::uint64_t q, std::uint64_t id) {
  auto g = group_for(q);
  std::vector<std::uint32_t> e;
  for (const auto& f : g->factors()) {
    e.push_back(static_cast<std::uint32_t>(id % f.order));
    id /= f.order;
  }
  if (id != 0) throw std::invalid_argument("character id out of range");
  return DirichletCharacter(g, std::move(e));
}

cd gauss_sum(const DirichletCharacter& chi) {
  const auto& g = chi.group();
  const auto& add = g.additive();
  const std::uint64_t q = g.modulus();
  CompensatedSum<cd> s;
  if (g.factors().empty()) {
    for (std::uint64_t a = 0; a < q; ++a) s += chi(a) * add[a];  // q = 2 drops the even residue
    return s.value();
  }
  if (g.cyclic()) {
    const std::uint64_t L = g.exponent();
    const std::uint64_t m = chi.multipliers()[0];
    std::uint64_t t = 0;
    for (std::uint32_t a : g.powers()) {
      s += g.root(t) * add[a];
      t += m;
      if (t >= L) t -= L;
    }
    return s.value();
  }
  for (std::uint64_t a = 1; a < q; ++a) {
    const std::uint64_t t = chi.phase(a);
    if (t != CharacterGroup::kNonUnit) s += g.root(t) * add[a];
  }
  return s.value();
}

std::vector<cd> all_gauss_sums(const CharacterGroup& g) {
  const std::uint64_t q = g.modulus();
  const auto& fs = g.factors();
  if (fs.empty()) {
    std::vector<cd> one(1);
    for (std::uint64_t a = 0; a < q; ++a)
      if (std::gcd(a, q) == 1) one[0] += g.additive()[a];
    return one;
  }
  std::vector<std::size_t> radix(fs.size());
  std::size_t total = 1;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    radix[i] = total;
    total *= fs[i].order;
  }
  // a[l] = conj(e(n/q)) at log coordinates l of n; forward FFT along each axis, then conjugate.
  std::vector<cd> a(total);
  const auto& add = g.additive();
  for (std::uint64_t n = 1; n < q; ++n) {
    if (!g.is_unit(n)) continue;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) idx += g.log(i, n) * radix[i];
    a[idx] = std::conj(add[n]);
  }
  Eigen::FFT<double> fft;
  std::vector<cd> in, out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::size_t n = fs[i].order, stride = radix[i];
    if (n == 1) continue;
    in.resize(n);
    for (std::size_t base = 0; base < total; ++base) {
      if ((base / stride) % n != 0) continue;
      for (std::size_t j = 0; j < n; ++j) in[j] = a[base + j * stride];
      fft.fwd(out, in);
      for (std::size_t j = 0; j < n; ++j) a[base + j * stride] = out[j];
    }
  }
  for (auto& x : a) x = std::conj(x);
  return a;
}

cd root_number(const DirichletCharacter& chi) {
  if (!chi.primitive() || !chi.even())
    throw PreconditionError("root number requires an even primitive character");
  return gauss_sum(chi) / std::sqrt(double(chi.modulus()));
}

CharacterFamily even_primitive_family(std::uint64_t q) {
  CharacterFamily fam;
  fam.q = q;
  fam.group = group_for(q);
  if (q % 4 == 2) {
    fam.root_numbers.resize(0);
    return fam;
  }
  for_each_exponent(*fam.group, [&](const std::vector<std::uint32_t>& e) {
    DirichletCharacter c(fam.group, e);
    if (c.even() && c.primitive()) fam.members.push_back(std::move(c));
  });
  const std::size_t n = fam.members.size();
  if (q <= kMaterializeBound)
    for (auto& c : fam.members) c.materialize();
  fam.root_numbers.resize(static_cast<Eigen::Index>(n));
  if (q <= kMaterializeBound) {
    for (std::size_t i = 0; i < n; ++i) fam.root_numbers[static_cast<Eigen::Index>(i)] = root_number(fam.members[i]);
  } else {
    const auto tau = all_gauss_sums(*fam.group);
    const double rq = std::sqrt(double(q));
    for (std::size_t i = 0; i < n; ++i) fam.root_numbers[static_cast<Eigen::Index>(i)] = tau[fam.members[i].id()] / rq;
  }
  std::unordered_map<std::uint64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < n; ++i) by_id[fam.members[i].id()] = i;
  fam.conj_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) fam.conj_index[i] = by_id.at(fam.members[i].conj().id());
  return fam;
}

double orthogonality_rhs(std::uint64_t q, std::uint64_t m, std::uint64_t n) {
  const std::uint64_t sum = m + n;
  const std::uint64_t diff = m > n ? m - n : n - m;
  double r = 0.0;
  for (std::uint64_t w : nt::divisors(q)) {
    const int mu = nt::mobius(q / w);
    if (mu == 0) continue;
    const double t = double(mu) * double(nt::euler_phi(w));
    if (sum % w == 0) r += 0.5 * t;
    if (diff % w == 0) r += 0.5 * t;
  }
  return r;
}

double eps_orthogonality_rhs(std::uint64_t q, std::uint64_t m, std::uint64_t n) {
  if (std::gcd(m * n, q) != 1) throw DomainError("eps_orthogonality_rhs needs (mn, q) = 1");
  double r = 0.0;
  for (std::uint64_t w : nt::divisors(q)) {
    const std::uint64_t v = q / w;
    if (std::gcd(v, w) != 1 || nt::mobius(v) == 0) continue;
    const std::uint64_t inv = w == 1 ? 0 : nt::invmod(nt::mulmod(m % w, v % w, w), w);
    const std::uint64_t k = nt::mulmod(n % w, inv, w);
    r += double(nt::euler_phi(w)) * std::cos(2.0 * std::numbers::pi * double(k) / double(w));
  }
  return r / std::sqrt(double(q));
}

cd all_characters_rhs(std::uint64_t w, std::uint64_t m, std::uint64_t n) {
  if (std::gcd(m * n, w) != 1) throw DomainError("all_characters_rhs needs (mn, w) = 1");
  const std::uint64_t k = w == 1 ? 0 : nt::mulmod(m % w, nt::invmod(n % w, w), w);
  const double a = -2.0 * std::numbers::pi * double(k) / double(w);
  return std::polar(double(nt::euler_phi(w)) / std::sqrt(double(w)), a);
}

}  // namespace mollify::characters
