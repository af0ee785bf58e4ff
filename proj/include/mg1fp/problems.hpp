#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mg1fp/model.hpp"

namespace mg1fp {

/// Block-tridiagonal test chain: off-diagonal mass alpha = (1-delta)/(3(n-1)),
/// A_{-1} = W + delta*I, A_0 = A_1 = W with W = alpha (ee^T - I). Drift -delta.
inline MG1Model gen_example_1a(int n, double delta) {
    if (n < 2) throw std::invalid_argument("gen_example_1a: n must be >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("gen_example_1a: delta must be in (0,1)");
    const double alpha = (1.0 - delta) / (3.0 * (n - 1));
    Mat w = Mat::constant(n, n, alpha);
    for (int i = 0; i < n; ++i) w(i, i) = 0.0;
    Mat am1 = w;
    for (int i = 0; i < n; ++i) am1(i, i) = delta;
    return MG1Model({am1, w, w});
}

/// Geometric-tail chain on a fixed 5x5 base: A_{-1} = (4(1-p)/3) B and
/// A_i = p^{i+1} A_{-1} for 0 <= i <= q_trunc. Row sums are 1 - p^{q_trunc+2}.
/// Drift (2p-1)/(1-p): positive recurrent below p = 0.5, transient above.
inline MG1Model gen_example_1b(double p, int q_trunc = 50) {
    if (!(p > 0.0 && p <= 0.6)) throw std::invalid_argument("gen_example_1b: p must be in (0, 0.6]");
    if (q_trunc < 1) throw std::invalid_argument("gen_example_1b: q_trunc must be >= 1");
    static const double base[5][5] = {
        {.05, .1, .2, .3, .1},
        {.2, .05, .1, .1, .3},
        {.1, .2, .3, .05, .1},
        {.1, .05, .2, .1, .3},
        {.3, .1, .1, .2, .05},
    };
    Mat am1(5, 5);
    const double scale = 4.0 * (1.0 - p) / 3.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) am1(i, j) = scale * base[i][j];
    std::vector<Mat> blocks;
    blocks.reserve(q_trunc + 2);
    blocks.push_back(am1);
    double f = p;
    for (int i = 0; i <= q_trunc; ++i) {
        blocks.push_back(f * am1);
        f *= p;
    }
    // row sums fall short of 1 by the dropped tail; widen the stochasticity
    // tolerance when a short truncation makes that exceed the default
    const double tail = 2.0 * std::pow(p, q_trunc + 2) / (1.0 - p);
    return MG1Model(std::move(blocks), std::max(1e-8, 1.5 * tail));
}

namespace detail {

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    int line() const { return line_; }

    // next whitespace-separated token, skipping blank and '#' comment lines
    bool next(std::string& tok) {
        while (true) {
            if (pos_ >= current_.size()) {
                if (!std::getline(in_, current_)) return false;
                ++line_;
                pos_ = 0;
                continue;
            }
            while (pos_ < current_.size() && std::isspace(static_cast<unsigned char>(current_[pos_]))) ++pos_;
            if (pos_ >= current_.size()) continue;
            if (current_[pos_] == '#') {
                pos_ = current_.size();
                continue;
            }
            std::size_t end = pos_;
            while (end < current_.size() && !std::isspace(static_cast<unsigned char>(current_[end]))) ++end;
            tok = current_.substr(pos_, end - pos_);
            pos_ = end;
            return true;
        }
    }

    double expect_number(const char* what) {
        std::string tok;
        if (!next(tok)) throw ParseError(line_, std::string("unexpected end of file, expected ") + what);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw ParseError(line_, "bad number '" + tok + "' for " + what);
        return v;
    }

    long long expect_integer(const char* what) {
        std::string tok;
        if (!next(tok)) throw ParseError(line_, std::string("unexpected end of file, expected ") + what);
        char* end = nullptr;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (end != tok.c_str() + tok.size())
            throw ParseError(line_, "bad integer '" + tok + "' for " + what);
        return v;
    }

    bool at_end() {
        std::string tok;
        return !next(tok);
    }

private:
    std::istream& in_;
    std::string current_;
    std::size_t pos_ = 0;
    int line_ = 0;
};

inline void write_block(std::ostream& out, const Mat& m) {
    out.precision(17);
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << m(i, j);
        }
        out << '\n';
    }
}

} // namespace detail

/// Text model format: a `n q` header line, then q+2 blocks A_{-1}, A_0, ...,
/// A_q, each n lines of n decimals (17 significant digits). Lines starting
/// with '#' are comments.
inline void save_model(const MG1Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "# M/G/1-type coefficient blocks A_{-1}..A_q, row-stochastic sum\n";
    out << model.n() << ' ' << model.q() << '\n';
    for (int b = -1; b <= model.q(); ++b) {
        out << "# A_" << b << '\n';
        detail::write_block(out, model.block(b));
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline MG1Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    detail::TokenReader tr(in);
    const long long n = tr.expect_integer("block size n");
    const long long q = tr.expect_integer("highest index q");
    if (n < 1) throw ParseError(tr.line(), "block size n must be >= 1");
    if (q < 1) throw ParseError(tr.line(), "highest index q must be >= 1");
    if (n > 5000 || q > 5000) throw ParseError(tr.line(), "unreasonable dimensions in header");
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(q) + 2);
    for (long long b = -1; b <= q; ++b) {
        Mat m(static_cast<int>(n), static_cast<int>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = tr.expect_number("matrix entry");
        blocks.push_back(std::move(m));
    }
    if (!tr.at_end()) throw ParseError(tr.line(), "trailing content after the last block");
    MG1Model model(std::move(blocks));
    std::vector<ValidationIssue> issues = validate(model);
    std::vector<ValidationIssue> fatal;
    for (auto& i : issues)
        if (i.fatal()) fatal.push_back(i);
    if (!fatal.empty()) throw ValidationError(std::move(fatal));
    return model;
}

/// Single matrix in the same textual block format; row length is inferred
/// from the first data line.
inline void save_matrix(const Mat& m, const std::string& path, const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    if (!comment.empty()) out << "# " << comment << '\n';
    detail::write_block(out, m);
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline Mat load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = line.substr(0, line.find('#'));
        std::istringstream ss(body);
        std::vector<double> row;
        std::string tok;
        while (ss >> tok) {
            char* end = nullptr;
            const double v = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size()) throw ParseError(lineno, "bad number '" + tok + "'");
            row.push_back(v);
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(lineno, "inconsistent row length");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(lineno, "no data rows");
    Mat m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

} // namespace mg1fp
