#pragma once
/**
 * @file geomlin.hpp
 * @brief Small dense linear algebra on subspaces: orthonormal frames, invariant
 *        sampling, one-sided Jacobi SVD, principal angles, wedge norms and the
 *        relative-position functional sigma.
 */

#include <realgrass/errors.hpp>
#include <realgrass/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace realgrass::geomlin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kMaxSvdDim = 64;
inline constexpr int kMaxJacobiSweeps = 60;
inline constexpr double kZeroAngleTol = 1e-8;

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// Column-orthonormal n x k matrix representing a point of G(k,n).
class Frame {
public:
    static constexpr double kOrthonormalityTol = 1e-12;

    /// Wraps an already orthonormal matrix; throws DomainError if it is not.
    static Frame from_orthonormal(Matrix q)
    {
        detail::require_domain(q.cols() >= 1 && q.cols() <= q.rows(), "Frame: need 1 <= k <= n");
        const Matrix gram = q.transpose() * q - Matrix::Identity(q.cols(), q.cols());
        detail::require_domain(gram.cwiseAbs().maxCoeff() <= kOrthonormalityTol, "Frame: columns are not orthonormal");
        return Frame(std::move(q));
    }

    /// Orthonormal basis of the column span via Gram-Schmidt with
    /// re-orthogonalization; the implied R factor has a positive diagonal.
    static Frame orthonormalize(const Matrix& m)
    {
        detail::require_domain(m.cols() >= 1 && m.cols() <= m.rows(), "Frame: need 1 <= k <= n");
        Matrix q = m;
        for (Eigen::Index j = 0; j < q.cols(); ++j) {
            const double scale = q.col(j).norm();
            for (int pass = 0; pass < 2; ++pass)
                for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
            const double nrm = q.col(j).norm();
            if (!(nrm > 1e-12 * scale) || nrm == 0.0) throw DomainError("Frame: input columns are rank deficient");
            q.col(j) /= nrm;
        }
        return Frame(std::move(q));
    }

    [[nodiscard]] int ambient() const { return static_cast<int>(q_.rows()); }
    [[nodiscard]] int rank() const { return static_cast<int>(q_.cols()); }
    [[nodiscard]] const Matrix& basis() const { return q_; }

    /// g * frame for an orthogonal g.
    [[nodiscard]] Frame transformed(const Matrix& g) const { return Frame(g * q_); }

    /// span of the listed standard basis vectors (0-based).
    static Frame coordinate(int n, std::span<const int> axes)
    {
        Matrix q = Matrix::Zero(n, static_cast<Eigen::Index>(axes.size()));
        for (std::size_t j = 0; j < axes.size(); ++j) q(axes[j], static_cast<Eigen::Index>(j)) = 1.0;
        return from_orthonormal(std::move(q));
    }

private:
    explicit Frame(Matrix q) : q_(std::move(q)) {}
    Matrix q_;
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

inline Matrix sample_gaussian_matrix(Rng& rng, int rows, int cols)
{
    detail::require_domain(rows >= 1 && cols >= 1, "sample_gaussian_matrix: dimensions must be >= 1");
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
    return m;
}

inline Vector sample_unit_vector(Rng& rng, int d)
{
    Vector v(d);
    double nrm = 0.0;
    do {
        for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
        nrm = v.norm();
    } while (nrm == 0.0);
    return v / nrm;
}

/// Uniform (O(n)-invariant) k-plane in R^n.
inline Frame sample_uniform_subspace(Rng& rng, int n, int k)
{
    detail::require_domain(k >= 1 && k <= n, "sample_uniform_subspace: need 1 <= k <= n");
    return Frame::orthonormalize(sample_gaussian_matrix(rng, n, k));
}

/// Haar-distributed orthogonal matrix.
inline Matrix sample_orthogonal(Rng& rng, int n) { return sample_uniform_subspace(rng, n, n).basis(); }

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD
// ---------------------------------------------------------------------------

/// Orthogonalizes the columns of `a` in place by plane rotations, accumulating
/// the rotations into `v` when given. Afterwards a = U * diag(sigma) with the
/// column norms as (unsorted) singular values. Returns the number of sweeps.
template <typename DA, typename DV>
int jacobi_orthogonalize(Eigen::MatrixBase<DA>& a, Eigen::MatrixBase<DV>* v)
{
    const Eigen::Index n = a.cols();
    if (v) v->setIdentity(n, n);
    const double frob2 = a.squaredNorm();
    const double abs_tol = 1e-14 * 1e-14 * frob2;
    for (int sweep = 1; sweep <= kMaxJacobiSweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index i = 0; i + 1 < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double alpha = a.col(i).squaredNorm();
                const double beta = a.col(j).squaredNorm();
                const double gamma = a.col(i).dot(a.col(j));
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || std::abs(gamma) <= abs_tol) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index r = 0; r < a.rows(); ++r) {
                    const double ai = a(r, i);
                    const double aj = a(r, j);
                    a(r, i) = c * ai - s * aj;
                    a(r, j) = s * ai + c * aj;
                }
                if (v) {
                    for (Eigen::Index r = 0; r < v->rows(); ++r) {
                        const double vi = (*v)(r, i);
                        const double vj = (*v)(r, j);
                        (*v)(r, i) = c * vi - s * vj;
                        (*v)(r, j) = s * vi + c * vj;
                    }
                }
            }
        }
        if (!rotated) return sweep;
    }
    throw NumericalError("jacobi_orthogonalize: no convergence within the sweep cap");
}

/// Thin SVD M = U diag(sigma) V^T, sigma descending, r = min(rows, cols).
struct SvdResult {
    Matrix u;
    Vector sigma;
    Matrix v;
};

namespace impl {

inline SvdResult jacobi_svd_tall(const Matrix& m)
{
    Matrix a = m;
    Matrix v;
    jacobi_orthogonalize(a, &v);
    const Eigen::Index r = a.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
    Vector norms(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        order[static_cast<std::size_t>(j)] = j;
        norms(j) = a.col(j).norm();
    }
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return norms(x) > norms(y); });
    SvdResult out{Matrix::Zero(a.rows(), r), Vector(r), Matrix(v.rows(), r)};
    for (Eigen::Index j = 0; j < r; ++j) {
        const auto src = order[static_cast<std::size_t>(j)];
        out.sigma(j) = norms(src);
        if (norms(src) > 0.0) out.u.col(j) = a.col(src) / norms(src);
        out.v.col(j) = v.col(src);
    }
    return out;
}

inline void check_svd_dims(const Matrix& m)
{
    detail::require_domain(m.rows() >= 1 && m.cols() >= 1 && m.rows() <= kMaxSvdDim && m.cols() <= kMaxSvdDim,
                                      "svd: dimensions must lie in [1, 64]");
}

} // namespace impl

inline SvdResult jacobi_svd(const Matrix& m)
{
    impl::check_svd_dims(m);
    if (m.rows() >= m.cols()) return impl::jacobi_svd_tall(m);
    auto t = impl::jacobi_svd_tall(m.transpose());
    return {std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

/// Singular values in descending order.
inline Vector singular_values(const Matrix& m)
{
    impl::check_svd_dims(m);
    Matrix a = m.rows() >= m.cols() ? m : Matrix(m.transpose());
    jacobi_orthogonalize(a, static_cast<Matrix*>(nullptr));
    Vector s = a.colwise().norm().transpose();
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s;
}

/// Orthonormal basis of ker(M): columns of the right rotation whose image norm
/// falls below rel_tol * sigma_max.
inline Matrix null_space(const Matrix& m, double rel_tol = 1e-10)
{
    impl::check_svd_dims(m);
    Matrix a = m;
    Matrix v;
    jacobi_orthogonalize(a, &v);
    const Vector norms = a.colwise().norm().transpose();
    const double smax = norms.size() ? norms.maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < norms.size(); ++j)
        if (norms(j) <= rel_tol * smax) keep.push_back(j);
    Matrix ker(m.cols(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) ker.col(static_cast<Eigen::Index>(j)) = v.col(keep[j]);
    return ker;
}

// ---------------------------------------------------------------------------
// Principal angles
// ---------------------------------------------------------------------------

struct PrincipalAngles {
    std::vector<double> angles; // ascending, in [0, pi/2]

    [[nodiscard]] int intersection_dim(double tol = kZeroAngleTol) const
    {
        return static_cast<int>(std::count_if(angles.begin(), angles.end(), [tol](double t) { return t < tol; }));
    }
    [[nodiscard]] std::size_t size() const { return angles.size(); }
    double operator[](std::size_t i) const { return angles[i]; }
};

/// Cosines come from the SVD of A^T B; angles below pi/4 are recomputed from
/// the sines (SVD of the component of A orthogonal to B) where arccos loses
/// half the digits.
inline PrincipalAngles principal_angles(const Frame& a_in, const Frame& b_in)
{
    detail::require_domain(a_in.ambient() == b_in.ambient(), "principal_angles: ambient dimensions differ");
    const bool swap = a_in.rank() > b_in.rank();
    const Matrix& a = swap ? b_in.basis() : a_in.basis();
    const Matrix& b = swap ? a_in.basis() : b_in.basis();
    const Vector cosines = singular_values(a.transpose() * b);
    const Matrix residual = a - b * (b.transpose() * a);
    Vector sines = singular_values(residual);
    std::reverse(sines.data(), sines.data() + sines.size());
    const double quarter = std::numbers::sqrt2 / 2.0;
    PrincipalAngles out;
    out.angles.resize(static_cast<std::size_t>(cosines.size()));
    for (Eigen::Index i = 0; i < cosines.size(); ++i) {
        const double c = std::clamp(cosines(i), 0.0, 1.0);
        const double s = std::clamp(sines(i), 0.0, 1.0);
        out.angles[static_cast<std::size_t>(i)] = c >= quarter ? std::asin(s) : std::acos(c);
    }
    std::sort(out.angles.begin(), out.angles.end());
    return out;
}

// ---------------------------------------------------------------------------
// Wedge norms and relative position
// ---------------------------------------------------------------------------

/// ||v_1 ^ ... ^ v_p|| for the columns of `vectors` (= sqrt det Gram), computed
/// as |det R| of a Householder QR. More vectors than dimensions give 0.
inline double wedge_norm(const Matrix& vectors)
{
    if (vectors.cols() == 0) return 1.0;
    if (vectors.cols() > vectors.rows()) return 0.0;
    Eigen::HouseholderQR<Matrix> qr(vectors);
    const Matrix& r = qr.matrixQR();
    double prod = 1.0;
    for (Eigen::Index i = 0; i < vectors.cols(); ++i) prod *= std::abs(r(i, i));
    return prod;
}

inline double wedge_norm(std::span<const Vector> vectors)
{
    if (vectors.empty()) return 1.0;
    Matrix m(vectors.front().size(), static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t j = 0; j < vectors.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = vectors[j];
    return wedge_norm(m);
}

/// sigma(V_1, ..., V_s): wedge norm of the concatenated orthonormal bases.
inline double sigma_many(std::span<const Frame> frames)
{
    detail::require_domain(!frames.empty(), "sigma_many: need at least one frame");
    const int n = frames.front().ambient();
    int total = 0;
    for (const auto& f : frames) {
        detail::require_domain(f.ambient() == n, "sigma_many: ambient dimensions differ");
        total += f.rank();
    }
    detail::require_domain(total <= n, "sigma_many: sum of dimensions exceeds the ambient dimension");
    Matrix m(n, total);
    int col = 0;
    for (const auto& f : frames) {
        m.middleCols(col, f.rank()) = f.basis();
        col += f.rank();
    }
    return std::min(1.0, wedge_norm(m));
}

inline double sigma_rel(const Frame& v, const Frame& w)
{
    const Frame both[] = {v, w};
    return sigma_many(both);
}

} // namespace realgrass::geomlin
