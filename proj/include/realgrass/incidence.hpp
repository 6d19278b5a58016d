#pragma once
/**
 * @file incidence.hpp
 * @brief Lines in RP^3 as Plucker vectors, the meet pairing, and exact counts of
 *        real lines meeting four given lines.
 *
 * Coordinates are ordered (p01, p02, p03, p12, p13, p23). The Klein quadric is
 * Q(p) = p01 p23 - p02 p13 + p03 p12 and the pairing is its polar form, so two
 * lines meet iff their pairing vanishes. The lines meeting l1..l4 are the points
 * of the Klein quadric on the projective line cut out by the four hyperplanes
 * pairing(l_i, .) = 0.
 */

#include <realgrass/errors.hpp>
#include <realgrass/geomlin.hpp>
#include <realgrass/stats.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace realgrass::incidence {

using geomlin::Frame;
using geomlin::Matrix;

/// Unit Plucker vector of a line in RP^3 (defined up to sign).
struct PluckerLine {
    std::array<double, 6> p{};

    double operator[](std::size_t i) const { return p[i]; }
};

inline double klein_residual(const std::array<double, 6>& p) { return p[0] * p[5] - p[1] * p[4] + p[2] * p[3]; }
inline double klein_residual(const PluckerLine& l) { return klein_residual(l.p); }

/// Polar form of the Klein quadric; B(p, p) = 2 Q(p).
inline double pairing(const std::array<double, 6>& p, const std::array<double, 6>& q)
{
    return p[0] * q[5] - p[1] * q[4] + p[2] * q[3] + p[3] * q[2] - p[4] * q[1] + p[5] * q[0];
}

/// Zero iff the two lines meet.
inline double meet_pairing(const PluckerLine& a, const PluckerLine& b) { return pairing(a.p, b.p); }

/// 2x2 minors of the columns of a 4x2 matrix, normalized. Any basis of the
/// plane (orthonormal or not) gives the same line up to sign.
inline PluckerLine plucker_of_columns(const Matrix& m)
{
    detail::require_domain(m.rows() == 4 && m.cols() == 2, "plucker_of: need a 4 x 2 matrix");
    std::array<double, 6> p{};
    int idx = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) p[idx++] = m(i, 0) * m(j, 1) - m(j, 0) * m(i, 1);
    double nrm = 0.0;
    for (double x : p) nrm += x * x;
    nrm = std::sqrt(nrm);
    const double scale = m.col(0).norm() * m.col(1).norm();
    if (!(nrm > 1e-12 * scale)) throw DomainError("plucker_of: columns are rank deficient");
    for (double& x : p) x /= nrm;
    return {p};
}

inline PluckerLine plucker_of(const Frame& frame)
{
    detail::require_domain(frame.ambient() == 4 && frame.rank() == 2, "plucker_of: need a 2-plane in R^4");
    return plucker_of_columns(frame.basis());
}

/// Orthonormal basis of the plane of a decomposable Plucker vector: the column
/// space of the skew matrix L = a b^T - b a^T.
inline Frame frame_of(const PluckerLine& l)
{
    Matrix skew = Matrix::Zero(4, 4);
    int idx = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            skew(i, j) = l.p[idx];
            skew(j, i) = -l.p[idx];
            ++idx;
        }
    const auto svd = geomlin::jacobi_svd(skew);
    return Frame::orthonormalize(svd.u.leftCols(2));
}

/// count is 0 or 2 for generic input; degenerate samples carry no count.
struct TransversalCount {
    int count = 0;
    bool degenerate = false;
};

inline constexpr double kKernelRelTol = 1e-10;
inline constexpr double kTangencyTol = 1e-12;

struct TransversalPencil {
    std::array<double, 6> u{};
    std::array<double, 6> v{};
    /// Q(s u + t v) = qa s^2 + qb s t + qc t^2
    double qa = 0.0;
    double qb = 0.0;
    double qc = 0.0;
    bool degenerate = true;
};

/// Kernel of the 4 x 6 pairing system and the Klein quadric restricted to it.
inline TransversalPencil transversal_pencil(std::span<const PluckerLine, 4> lines, double tol = kTangencyTol)
{
    Matrix sys(4, 6);
    for (int r = 0; r < 4; ++r) {
        const auto& p = lines[static_cast<std::size_t>(r)].p;
        // row . x = pairing(p, x)
        sys.row(r) << p[5], -p[4], p[3], p[2], -p[1], p[0];
    }
    TransversalPencil out;
    const Matrix ker = geomlin::null_space(sys, kKernelRelTol);
    if (ker.cols() != 2) return out;
    for (int i = 0; i < 6; ++i) {
        out.u[static_cast<std::size_t>(i)] = ker(i, 0);
        out.v[static_cast<std::size_t>(i)] = ker(i, 1);
    }
    out.qa = klein_residual(out.u);
    out.qb = pairing(out.u, out.v);
    out.qc = klein_residual(out.v);
    const double scale = std::max({std::abs(out.qa), std::abs(out.qb), std::abs(out.qc)});
    out.degenerate = !(scale >= tol);
    return out;
}

/// Number of real lines meeting all four; tangent configurations (discriminant
/// within tol * scale^2 of zero) are flagged degenerate.
inline TransversalCount transversals_of_four(std::span<const PluckerLine, 4> lines, double tol = kTangencyTol)
{
    const auto pencil = transversal_pencil(lines, tol);
    if (pencil.degenerate) return {0, true};
    const double scale = std::max({std::abs(pencil.qa), std::abs(pencil.qb), std::abs(pencil.qc)});
    const double disc = pencil.qb * pencil.qb - 4.0 * pencil.qa * pencil.qc;
    if (std::abs(disc) < tol * scale * scale) return {0, true};
    return {disc > 0.0 ? 2 : 0, false};
}

inline TransversalCount transversals_of_four(const std::array<PluckerLine, 4>& lines, double tol = kTangencyTol)
{
    return transversals_of_four(std::span<const PluckerLine, 4>(lines), tol);
}

/// The real transversals themselves (empty when there are none or the input is degenerate).
inline std::vector<PluckerLine> transversal_lines(const std::array<PluckerLine, 4>& lines, double tol = kTangencyTol)
{
    const auto pencil = transversal_pencil(std::span<const PluckerLine, 4>(lines), tol);
    std::vector<PluckerLine> out;
    if (pencil.degenerate) return out;
    const double a = pencil.qa, b = pencil.qb, c = pencil.qc;
    const double disc = b * b - 4.0 * a * c;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
    if (!(disc > tol * scale * scale)) return out;
    // roots [s : t] of a s^2 + b s t + c t^2, taking the larger of |a|, |c| as leading
    std::array<std::array<double, 2>, 2> roots{};
    const double sq = std::sqrt(disc);
    if (std::abs(a) >= std::abs(c)) {
        const double qq = -0.5 * (b + std::copysign(sq, b));
        roots = {{{qq / a, 1.0}, {c / qq, 1.0}}};
    } else {
        const double qq = -0.5 * (b + std::copysign(sq, b));
        roots = {{{1.0, qq / c}, {1.0, a / qq}}};
    }
    for (const auto& st : roots) {
        PluckerLine l;
        double nrm = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            l.p[i] = st[0] * pencil.u[i] + st[1] * pencil.v[i];
            nrm += l.p[i] * l.p[i];
        }
        nrm = std::sqrt(nrm);
        for (double& x : l.p) x /= nrm;
        out.push_back(l);
    }
    return out;
}

inline PluckerLine sample_uniform_line(Rng& rng) { return plucker_of(geomlin::sample_uniform_subspace(rng, 4, 2)); }

/// Mean number of real lines meeting four uniform random lines.
inline Estimate edeg24_transversal_mc(RngStream stream, std::uint64_t samples, ParallelConfig cfg = {})
{
    return estimate_mean(stream, samples, cfg, "transversal_mc", [](Rng& rng) -> std::optional<double> {
        std::array<PluckerLine, 4> lines;
        for (auto& l : lines) l = sample_uniform_line(rng);
        const auto c = transversals_of_four(lines);
        if (c.degenerate) return std::nullopt;
        return static_cast<double>(c.count);
    });
}

/// X_i = union of r_i random lines; per sample the transversal counts of all
/// r_1 r_2 r_3 r_4 quadruples are summed. A sample with any degenerate
/// quadruple is discarded.
inline Estimate rig_union_of_lines_mc(const std::array<int, 4>& r, RngStream stream, std::uint64_t samples,
                                      ParallelConfig cfg = {})
{
    long long combos = 1;
    for (int ri : r) {
        detail::require_domain(ri >= 1, "rig_union_of_lines_mc: every r_i must be >= 1");
        combos *= ri;
    }
    detail::require_domain(combos <= 1000, "rig_union_of_lines_mc: r_1 r_2 r_3 r_4 must be <= 1000");
    return estimate_mean(stream, samples, cfg, "rig_union_mc", [r](Rng& rng) -> std::optional<double> {
        std::array<std::vector<PluckerLine>, 4> sets;
        for (std::size_t i = 0; i < 4; ++i) {
            sets[i].resize(static_cast<std::size_t>(r[i]));
            for (auto& l : sets[i]) l = sample_uniform_line(rng);
        }
        int total = 0;
        for (const auto& a : sets[0])
            for (const auto& b : sets[1])
                for (const auto& c : sets[2])
                    for (const auto& d : sets[3]) {
                        const auto t = transversals_of_four(std::array<PluckerLine, 4>{a, b, c, d});
                        if (t.degenerate) return std::nullopt;
                        total += t.count;
                    }
        return static_cast<double>(total);
    });
}

} // namespace realgrass::incidence
