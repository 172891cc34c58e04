#include "lms/fourier.hpp"

#include "lms/errors.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace lms {

SubgroupBasis::SubgroupBasis(const FieldSpec& f, const std::vector<Code>& generators)
    : field_(f), basis_(echelon_basis(f, generators)) {
    for (Code b : basis_) {
        for (int i = 0; i < f.dim(); ++i)
            if (f.coord(b, i) != 0) {
                pivots_.push_back(i);
                break;
            }
    }
}

std::uint64_t SubgroupBasis::order() const {
    std::uint64_t n = 1;
    for (int i = 0; i < rank(); ++i) {
        n *= static_cast<std::uint64_t>(field_.ell());
        if (n > tuple_cap()) throw CapExceeded("subgroup order", n, tuple_cap());
    }
    return n;
}

std::vector<int> SubgroupBasis::coords(Code x) const {
    std::vector<int> lambda(rank());
    Code rebuilt = 0;
    for (int i = 0; i < rank(); ++i) {
        lambda[i] = field_.coord(x, pivots_[i]);
        rebuilt = field_.add(rebuilt, field_.scale(lambda[i], basis_[i]));
    }
    if (rebuilt != x) throw NotInGroup("point " + std::to_string(x) + " is not in the subgroup");
    return lambda;
}

bool SubgroupBasis::contains(Code x) const {
    Code rebuilt = 0;
    for (int i = 0; i < rank(); ++i) rebuilt = field_.add(rebuilt, field_.scale(field_.coord(x, pivots_[i]), basis_[i]));
    return rebuilt == x;
}

std::uint64_t SubgroupBasis::index_of(Code x) const {
    std::uint64_t idx = 0;
    for (int v : coords(x)) idx = idx * field_.ell() + static_cast<std::uint64_t>(v);
    return idx;
}

Code SubgroupBasis::element(std::uint64_t index) const {
    Code x = 0;
    for (int i = rank() - 1; i >= 0; --i) {
        int c = static_cast<int>(index % field_.ell());
        index /= field_.ell();
        x = field_.add(x, field_.scale(c, basis_[i]));
    }
    return x;
}

PointSet SubgroupBasis::elements() const {
    std::uint64_t n = order();
    std::vector<Code> out(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = element(i);
    return PointSet(field_, std::move(out));
}

bool Character::trivial() const {
    for (int v : dual)
        if (v != 0) return false;
    return true;
}

std::uint64_t Character::index() const {
    std::uint64_t idx = 0;
    for (int v : dual) idx = idx * ell + static_cast<std::uint64_t>(v);
    return idx;
}

Character character_at(const SubgroupBasis& g, std::uint64_t index) {
    Character chi;
    chi.ell = g.field().ell();
    chi.dual.assign(g.rank(), 0);
    for (int i = g.rank() - 1; i >= 0; --i) {
        chi.dual[i] = static_cast<int>(index % chi.ell);
        index /= chi.ell;
    }
    return chi;
}

int pairing(const SubgroupBasis& g, const Character& chi, Code x) {
    if (static_cast<int>(chi.dual.size()) != g.rank()) throw ArityMismatch("character rank differs from group rank");
    std::vector<int> lambda = g.coords(x);
    long long s = 0;
    for (int i = 0; i < g.rank(); ++i) s += static_cast<long long>(chi.dual[i]) * lambda[i];
    return static_cast<int>(s % chi.ell);
}

std::complex<double> root_of_unity(int ell, int power) {
    power %= ell;
    if (power < 0) power += ell;
    if (power == 0) return {1.0, 0.0};
    if (2 * power == ell) return {-1.0, 0.0};
    return std::polar(1.0, 2.0 * std::numbers::pi * power / ell);
}

std::complex<double> char_eval(const SubgroupBasis& g, const Character& chi, Code x) {
    return root_of_unity(chi.ell, pairing(g, chi, x));
}

std::complex<double> fourier_coeff(const PointSet& b, const Character& chi, const SubgroupBasis& g) {
    std::complex<double> s = 0.0;
    for (Code x : b.members) s += root_of_unity(chi.ell, -pairing(g, chi, x));
    return s / static_cast<double>(g.order());
}

std::complex<double> fourier_coeff(const PointSet& b, const Character& chi) {
    return fourier_coeff(b, chi, SubgroupBasis::span_of(b));
}

namespace {

// In-place DFT of length ell along every axis; sign -1 is the forward
// (analysis) direction.
void separable_dft(std::vector<std::complex<double>>& data, int ell, int rank, int sign) {
    std::vector<std::complex<double>> roots(ell);
    for (int j = 0; j < ell; ++j) roots[j] = root_of_unity(ell, sign * j);
    std::vector<std::complex<double>> buf(ell);
    std::uint64_t stride = 1;
    for (int axis = 0; axis < rank; ++axis) {
        std::uint64_t block = stride * ell;
        for (std::uint64_t base = 0; base < data.size(); base += block)
            for (std::uint64_t off = 0; off < stride; ++off) {
                for (int a = 0; a < ell; ++a) {
                    std::complex<double> s = 0.0;
                    for (int x = 0; x < ell; ++x) s += data[base + off + x * stride] * roots[(a * x) % ell];
                    buf[a] = s;
                }
                for (int a = 0; a < ell; ++a) data[base + off + a * stride] = buf[a];
            }
        stride = block;
    }
}

std::vector<std::complex<double>> indicator(const PointSet& b, const SubgroupBasis& g) {
    std::vector<std::complex<double>> f(g.order(), 0.0);
    for (Code x : b.members) f[g.index_of(x)] = 1.0;
    return f;
}

}  // namespace

FourierTable fourier_table(const PointSet& b, const SubgroupBasis& g) {
    FourierTable t;
    t.group = g;
    t.coeffs = indicator(b, g);
    separable_dft(t.coeffs, g.field().ell(), g.rank(), -1);
    double n = static_cast<double>(g.order());
    for (auto& c : t.coeffs) c /= n;
    return t;
}

FourierTable fourier_table(const PointSet& b) { return fourier_table(b, SubgroupBasis::span_of(b)); }

double parseval_check(const PointSet& b, const SubgroupBasis& g) {
    FourierTable t = fourier_table(b, g);
    double s = 0.0;
    for (const auto& c : t.coeffs) s += std::norm(c);
    double mu = static_cast<double>(b.size()) / static_cast<double>(g.order());
    return std::abs(s - mu);
}

double parseval_check(const PointSet& b) { return parseval_check(b, SubgroupBasis::span_of(b)); }

double inversion_residual(const PointSet& b, const SubgroupBasis& g) {
    FourierTable t = fourier_table(b, g);
    std::vector<std::complex<double>> rec = t.coeffs;
    separable_dft(rec, g.field().ell(), g.rank(), +1);
    std::vector<std::complex<double>> f = indicator(b, g);
    double worst = 0.0;
    for (size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(rec[i] - f[i]));
    return worst;
}

std::vector<Character> heavy_characters(const PointSet& b, const Rational& eps, const SubgroupBasis& g) {
    FourierTable t = fourier_table(b, g);
    double threshold = to_double(eps) - kFourierBand;
    std::vector<Character> out;
    for (std::uint64_t i = 1; i < t.coeffs.size(); ++i)
        if (std::abs(t.coeffs[i]) >= threshold) out.push_back(t.character(i));
    return out;
}

std::vector<Character> heavy_characters(const PointSet& b, const Rational& eps) {
    return heavy_characters(b, eps, SubgroupBasis::span_of(b));
}

PointSet kernel(const SubgroupBasis& g, const Character& chi) {
    std::vector<Code> out;
    std::uint64_t n = g.order();
    for (std::uint64_t i = 0; i < n; ++i) {
        Code x = g.element(i);
        if (pairing(g, chi, x) == 0) out.push_back(x);
    }
    return PointSet(g.field(), std::move(out));
}

std::string coeff_csv(const FourierTable& table) {
    std::ostringstream os;
    os << "dual_vector,re,im,abs\n";
    char buf[128];
    for (std::uint64_t i = 0; i < table.coeffs.size(); ++i) {
        Character chi = table.character(i);
        std::string dv;
        for (size_t j = 0; j < chi.dual.size(); ++j) dv += (j ? " " : "") + std::to_string(chi.dual[j]);
        const auto& c = table.coeffs[i];
        // Round away -0 and sub-band noise so output is stable across platforms.
        auto clean = [](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; };
        std::snprintf(buf, sizeof buf, ",%.12f,%.12f,%.12f\n", clean(c.real()), clean(c.imag()), clean(std::abs(c)));
        os << dv << buf;
    }
    return os.str();
}

}  // namespace lms
