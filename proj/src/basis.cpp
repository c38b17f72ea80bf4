#include "pstomo/basis.hpp"

#include <cmath>
#include <numbers>

#include "pstomo/errors.hpp"
#include "pstomo/rng.hpp"

namespace pstomo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_even_dim(int d, const char* who) {
    if (d < 4 || d % 2 != 0) {
        throw UnsupportedDimension(std::string(who) + ": dimension must be even and >= 4");
    }
}

void require_unit_params(const PairBasisParams& p) {
    if (!(p.a > 0.0) || !(p.b > 0.0) || std::abs(p.a * p.a + p.b * p.b - 1.0) > 1e-12) {
        throw InvalidParams("pair basis params: need a, b > 0 with a^2 + b^2 = 1");
    }
}

cx cdot(const std::vector<cx>& u, const std::vector<cx>& v) {
    cx acc = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) acc += std::conj(u[k]) * v[k];
    return acc;
}

}  // namespace

PairBasisParams default_params(int d) {
    require_even_dim(d, "default_params");
    PairBasisParams p;
    p.a = kInvSqrt2;
    p.b = kInvSqrt2;
    p.phases.resize(static_cast<std::size_t>(d / 2));
    for (int n = 0; n < d / 2; ++n) {
        p.phases[static_cast<std::size_t>(n)] = std::numbers::pi * n * (n + 1) / d;
    }
    return p;
}

OrthonormalBasis canonical(int d) {
    require_even_dim(d, "canonical");
    OrthonormalBasis b;
    b.id = "B0";
    b.dim = d;
    b.vectors.assign(static_cast<std::size_t>(d), std::vector<cx>(static_cast<std::size_t>(d), 0.0));
    b.roles.assign(static_cast<std::size_t>(d), VectorRole::Canonical);
    for (int k = 0; k < d; ++k) b.vectors[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = 1.0;
    return b;
}

std::array<OrthonormalBasis, 4> five_bases(int d, const PairBasisParams& params) {
    require_even_dim(d, "five_bases");
    require_unit_params(params);
    const double a = params.a;
    const double b = params.b;
    std::array<OrthonormalBasis, 4> out;
    for (int bi = 0; bi < 4; ++bi) {
        OrthonormalBasis& basis = out[static_cast<std::size_t>(bi)];
        basis.id = "B" + std::to_string(bi + 1);
        basis.dim = d;
        const int shift = (bi < 2) ? 0 : 1;  // B1/B2 pair (2v, 2v+1); B3/B4 pair (2v+1, 2v+2)
        const bool imag = (bi % 2 == 1);     // B2/B4 carry the relative phase i
        for (int v = 0; v < d / 2; ++v) {
            const int lo = (2 * v + shift) % d;
            const int hi = (2 * v + 1 + shift) % d;
            // The minus partner is the orthogonal complement within the
            // pair, (b, -a); the naive (a, -b) is not orthogonal to the
            // plus vector unless a = b. Both agree at a = b = 1/sqrt(2).
            for (int sign : {+1, -1}) {
                std::vector<cx> vec(static_cast<std::size_t>(d), 0.0);
                double lo_w = sign > 0 ? a : b;
                double hi_w = sign > 0 ? b : -a;
                vec[static_cast<std::size_t>(lo)] = lo_w;
                vec[static_cast<std::size_t>(hi)] = imag ? cx(0.0, hi_w) : cx(hi_w, 0.0);
                basis.vectors.push_back(std::move(vec));
                basis.roles.push_back(sign > 0 ? VectorRole::PairPlus : VectorRole::PairMinus);
            }
        }
    }
    return out;
}

std::vector<std::vector<cx>> fourier_completion(int d, int shift, std::span<const double> phases,
                                                double a, double b) {
    require_even_dim(d, "fourier_completion");
    if (shift != 0 && shift != 1) throw InvalidParams("fourier_completion: shift must be 0 or 1");
    if (static_cast<int>(phases.size()) != d / 2) {
        throw InvalidParams("fourier_completion: need d/2 phases");
    }
    const int half = d / 2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(half));
    std::vector<std::vector<cx>> vecs;
    vecs.reserve(static_cast<std::size_t>(half));
    for (int j = 0; j < half; ++j) {
        std::vector<cx> v(static_cast<std::size_t>(d), 0.0);
        for (int n = 0; n < half; ++n) {
            double ang = 2.0 * std::numbers::pi * j * n / half + phases[static_cast<std::size_t>(n)];
            cx f = scale * cx(std::cos(ang), std::sin(ang));
            v[static_cast<std::size_t>((2 * n + shift) % d)] += b * f;
            v[static_cast<std::size_t>((2 * n + 1 + shift) % d)] += -a * f;
        }
        vecs.push_back(std::move(v));
    }
    return vecs;
}

namespace {

OrthonormalBasis completed_pair_basis(int d, int shift, const PairBasisParams& params,
                                      const std::vector<std::vector<cx>>& completions) {
    OrthonormalBasis basis;
    basis.id = (shift == 0) ? "B1p" : "B3p";
    basis.dim = d;
    for (int v = 0; v < d / 2; ++v) {
        std::vector<cx> vec(static_cast<std::size_t>(d), 0.0);
        vec[static_cast<std::size_t>((2 * v + shift) % d)] = params.a;
        vec[static_cast<std::size_t>((2 * v + 1 + shift) % d)] = params.b;
        basis.vectors.push_back(std::move(vec));
        basis.roles.push_back(VectorRole::PairPlus);
    }
    for (const auto& c : completions) {
        basis.vectors.push_back(c);
        basis.roles.push_back(VectorRole::Completion);
    }
    return basis;
}

}  // namespace

ThreeBasisSet three_bases(int d, const PairBasisParams& params) {
    require_even_dim(d, "three_bases");
    require_unit_params(params);
    if (static_cast<int>(params.phases.size()) != d / 2) {
        throw InvalidParams("three_bases: need d/2 completion phases");
    }
    ThreeBasisSet set;
    set.params = params;
    set.canonical = canonical(d);
    set.b1p = completed_pair_basis(d, 0, params, fourier_completion(d, 0, params.phases, params.a, params.b));
    set.b3p = completed_pair_basis(d, 1, params, fourier_completion(d, 1, params.phases, params.a, params.b));
    return set;
}

std::vector<std::vector<cx>> gram_schmidt(std::vector<std::vector<cx>> vectors) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        // Two projection passes keep the residual orthogonality near
        // machine precision even for nearly dependent inputs.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                cx ov = cdot(vectors[j], vectors[i]);
                for (std::size_t k = 0; k < vectors[i].size(); ++k) {
                    vectors[i][k] -= ov * vectors[j][k];
                }
            }
        }
        double nrm = std::sqrt(std::real(cdot(vectors[i], vectors[i])));
        if (nrm < 1e-10) {
            throw LinearlyDependent("gram_schmidt: residual norm below 1e-10 at vector " +
                                    std::to_string(i));
        }
        // An already-unit vector is left untouched so orthonormal inputs
        // round-trip exactly.
        if (std::abs(nrm - 1.0) > 1e-14) {
            for (cx& c : vectors[i]) c /= nrm;
        }
    }
    return vectors;
}

ThreeBasisSet random_three_bases(int d, std::uint64_t seed) {
    require_even_dim(d, "random_three_bases");
    Rng rng(seed);
    PairBasisParams params;
    params.a = 0.3 + 0.65 * rng.uniform();
    params.b = std::sqrt(1.0 - params.a * params.a);
    params.phases.assign(static_cast<std::size_t>(d / 2), 0.0);

    ThreeBasisSet set;
    set.params = params;
    set.randomized = true;
    set.canonical = canonical(d);

    for (int shift : {0, 1}) {
        // Pair-plus vectors are fixed by (a, b); completion slots are random
        // directions in their orthogonal complement.
        std::vector<std::vector<cx>> pair_plus;
        for (int v = 0; v < d / 2; ++v) {
            std::vector<cx> vec(static_cast<std::size_t>(d), 0.0);
            vec[static_cast<std::size_t>((2 * v + shift) % d)] = params.a;
            vec[static_cast<std::size_t>((2 * v + 1 + shift) % d)] = params.b;
            pair_plus.push_back(std::move(vec));
        }
        std::vector<std::vector<cx>> completions;
        for (int attempt = 0; attempt < 16 && completions.empty(); ++attempt) {
            std::vector<std::vector<cx>> all = pair_plus;
            for (int j = 0; j < d / 2; ++j) {
                std::vector<cx> v(static_cast<std::size_t>(d));
                for (cx& c : v) c = rng.complex_normal();
                all.push_back(std::move(v));
            }
            try {
                all = gram_schmidt(std::move(all));
                completions.assign(all.begin() + d / 2, all.end());
            } catch (const LinearlyDependent&) {
                // redraw
            }
        }
        if (completions.empty()) {
            throw DegenerateDraw("random_three_bases: orthogonalization kept failing");
        }
        OrthonormalBasis basis = completed_pair_basis(d, shift, params, completions);
        (shift == 0 ? set.b1p : set.b3p) = std::move(basis);
    }
    return set;
}

AdaptedBases adapt_to_support(const std::vector<int>& arc, int ambient_dim, std::uint64_t seed) {
    if (arc.empty()) throw SubspaceTooSmall("adapt_to_support: empty arc");
    for (std::size_t t = 1; t < arc.size(); ++t) {
        if (arc[t] != (arc[t - 1] + 1) % ambient_dim) {
            throw InvalidParams("adapt_to_support: arc must be cyclically contiguous");
        }
    }
    std::vector<int> support = arc;
    if (support.size() % 2 != 0) {
        support.push_back((support.back() + 1) % ambient_dim);  // absorb one neighboring zero index
    }
    if (support.size() < 4) {
        throw SubspaceTooSmall("adapt_to_support: padded arc shorter than 4");
    }
    AdaptedBases out;
    out.support = std::move(support);
    out.ambient_dim = ambient_dim;
    out.bases = random_three_bases(static_cast<int>(out.support.size()), seed);
    return out;
}

OrthonormalBasis AdaptedBases::embed(const OrthonormalBasis& local) const {
    OrthonormalBasis full;
    full.id = local.id;
    full.dim = ambient_dim;
    full.roles = local.roles;
    for (const auto& v : local.vectors) {
        std::vector<cx> w(static_cast<std::size_t>(ambient_dim), 0.0);
        for (std::size_t k = 0; k < v.size(); ++k) {
            w[static_cast<std::size_t>(support[k])] = v[k];
        }
        full.vectors.push_back(std::move(w));
    }
    return full;
}

PureState AdaptedBases::embed_state(const PureState& local) const {
    std::vector<cx> w(static_cast<std::size_t>(ambient_dim), 0.0);
    for (std::size_t k = 0; k < local.amps.size(); ++k) {
        w[static_cast<std::size_t>(support[k])] = local.amps[k];
    }
    return make_state(std::move(w));
}

bool check_orthonormal(const OrthonormalBasis& basis, double tol) {
    const int n = basis.size();
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            cx g = cdot(basis.vectors[static_cast<std::size_t>(i)],
                        basis.vectors[static_cast<std::size_t>(j)]);
            cx expect = (i == j) ? cx(1.0, 0.0) : cx(0.0, 0.0);
            if (std::abs(g - expect) >= tol) return false;
        }
    }
    return true;
}

}  // namespace pstomo
