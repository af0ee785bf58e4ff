#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mg1fp/eig.hpp"
#include "mg1fp/matrix.hpp"

namespace mg1fp {

/// Coefficient sequence A_{-1}, A_0, ..., A_q of a banded M/G/1-type chain.
/// Blocks are immutable after construction; index them with block(i) for
/// i in [-1, q].
class MG1Model {
public:
    MG1Model(std::vector<Mat> blocks, double stochastic_tol = 1e-8)
        : blocks_(std::move(blocks)), stochastic_tol_(stochastic_tol) {
        if (blocks_.size() < 3)
            throw DimensionMismatch("MG1Model: need at least A_{-1}, A_0, A_1 (q >= 1)");
        n_ = blocks_.front().rows();
        for (const Mat& b : blocks_)
            if (!b.square() || b.rows() != n_)
                throw DimensionMismatch("MG1Model: all blocks must be n x n");
        q_ = static_cast<int>(blocks_.size()) - 2;
    }

    int n() const { return n_; }
    int q() const { return q_; }
    double stochastic_tol() const { return stochastic_tol_; }

    const Mat& block(int i) const { return blocks_[static_cast<std::size_t>(i + 1)]; }

    /// A = sum of all blocks.
    Mat coefficient_sum() const {
        Mat a = blocks_[0];
        for (std::size_t t = 1; t < blocks_.size(); ++t) add_into(a, blocks_[t]);
        return a;
    }

private:
    std::vector<Mat> blocks_;
    double stochastic_tol_;
    int n_ = 0;
    int q_ = 0;
};

enum class IssueKind { negative_entry, row_sum_off, reducible_suspected };

struct ValidationIssue {
    IssueKind kind;
    int block = 0;   // block index in [-1, q]; unused for row-level issues
    int row = -1;
    int col = -1;
    double magnitude = 0.0;

    bool fatal() const { return kind != IssueKind::reducible_suspected; }

    std::string describe() const {
        switch (kind) {
            case IssueKind::negative_entry:
                return "negative entry " + std::to_string(magnitude) + " in A_" + std::to_string(block) +
                       " at (" + std::to_string(row) + "," + std::to_string(col) + ")";
            case IssueKind::row_sum_off:
                return "row " + std::to_string(row) + " of sum(A_i) deviates from 1 by " +
                       std::to_string(magnitude);
            case IssueKind::reducible_suspected:
                return "nonzero pattern of sum(A_i) looks reducible (advisory)";
        }
        return "unknown issue";
    }
};

struct ValidationError : std::runtime_error {
    std::vector<ValidationIssue> issues;
    explicit ValidationError(std::vector<ValidationIssue> iss)
        : std::runtime_error(iss.empty() ? "validation failed"
                                         : "validation failed: " + iss.front().describe()),
          issues(std::move(iss)) {}
};

namespace detail {

// Reachability sweep over the nonzero pattern of a; forward or transposed.
inline bool all_reachable(const Mat& a, bool transposed) {
    const int n = a.rows();
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v) {
            const double w = transposed ? a(v, u) : a(u, v);
            if (w != 0.0 && !seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == n;
}

} // namespace detail

/// Checks nonnegativity of every block and row-stochasticity of their sum
/// (within stochastic_tol). Irreducibility of the sum's nonzero pattern is
/// checked by reachability and reported as advisory only.
inline std::vector<ValidationIssue> validate(const MG1Model& model) {
    std::vector<ValidationIssue> issues;
    for (int b = -1; b <= model.q(); ++b) {
        const Mat& blk = model.block(b);
        for (int i = 0; i < model.n(); ++i)
            for (int j = 0; j < model.n(); ++j)
                if (blk(i, j) < 0.0)
                    issues.push_back({IssueKind::negative_entry, b, i, j, blk(i, j)});
    }
    const Mat a = model.coefficient_sum();
    const std::vector<double> rs = row_sums(a);
    for (int i = 0; i < model.n(); ++i) {
        const double dev = rs[i] - 1.0;
        if (std::abs(dev) > model.stochastic_tol())
            issues.push_back({IssueKind::row_sum_off, 0, i, -1, dev});
    }
    if (model.n() > 1 && (!detail::all_reachable(a, false) || !detail::all_reachable(a, true)))
        issues.push_back({IssueKind::reducible_suspected, 0, -1, -1, 0.0});
    return issues;
}

inline bool has_fatal(const std::vector<ValidationIssue>& issues) {
    for (const auto& i : issues)
        if (i.fatal()) return true;
    return false;
}

enum class Recurrence { positive_recurrent, null_recurrent, transient };

inline const char* to_string(Recurrence r) {
    switch (r) {
        case Recurrence::positive_recurrent: return "positive_recurrent";
        case Recurrence::null_recurrent: return "null_recurrent";
        case Recurrence::transient: return "transient";
    }
    return "?";
}

struct DriftReport {
    std::vector<double> v;   // Perron left vector of sum(A_i), v > 0, v'e = 1
    std::vector<double> w;   // sum_i i * A_i * e
    double eta = 0.0;        // drift v'w
    Recurrence classification = Recurrence::null_recurrent;
};

/// Drift of the chain: eta = v'w with v the normalized Perron left vector of
/// the coefficient sum. Sign classifies recurrence with a +-1e-12 dead zone.
inline DriftReport drift(const MG1Model& model, double tol = 1e-12, int max_iter = 500000) {
    const Mat at = transpose(model.coefficient_sum());
    const EigenEstimate est = dominant_eig(at, tol, max_iter);
    if (!est.converged)
        throw PerronFailure("drift: power iteration on sum(A_i)^T did not converge");
    DriftReport rep;
    rep.v = est.vector;
    double s = 0.0;
    for (double vi : rep.v) s += vi;
    for (double& vi : rep.v) vi /= s;

    rep.w.assign(model.n(), 0.0);
    for (int b = -1; b <= model.q(); ++b) {
        const std::vector<double> rs = row_sums(model.block(b));
        for (int i = 0; i < model.n(); ++i) rep.w[i] += b * rs[i];
    }
    rep.eta = dot(rep.v, rep.w);
    if (rep.eta < -1e-12)
        rep.classification = Recurrence::positive_recurrent;
    else if (rep.eta > 1e-12)
        rep.classification = Recurrence::transient;
    else
        rep.classification = Recurrence::null_recurrent;
    return rep;
}

/// True iff every block A_i with i >= 2 vanishes.
inline bool is_qbd(const MG1Model& model) {
    for (int b = 2; b <= model.q(); ++b)
        if (inf_norm(model.block(b)) != 0.0) return false;
    return true;
}

} // namespace mg1fp
