#pragma once

// Plain-text persistence: locale-independent round-trip number
// formatting, trajectory checkpoints, and the diagnostics, drift, and
// convergence tables the command-line driver writes.

#include <zeitlin/sphere_analysis.hpp>

#include <charconv>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace zeitlin {

// 17 significant digits round-trip every double; to_chars is
// locale-independent and trims trailing zeros.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace detail {

// Strict full-token parse; no locale, no partial consumption.
inline bool parse_double_token(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

inline bool parse_int_token(const std::string& s, int& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

inline Complex parse_pair(const std::string& token, const std::string& path) {
    const std::size_t comma = token.find(',');
    if (comma == std::string::npos)
        throw io_error("load_checkpoint: malformed entry '" + token + "' in '" +
                       path + "'");
    double re = 0.0, im = 0.0;
    if (!parse_double_token(token.substr(0, comma), re) ||
        !parse_double_token(token.substr(comma + 1), im))
        throw io_error("load_checkpoint: malformed entry '" + token + "' in '" +
                       path + "'");
    return Complex(re, im);
}

}  // namespace detail

// Checkpoint layout: header line `zeitlin-mhd v1 N=<n>`, then the four
// matrices in order W, P, Q, Xi, each as N lines of N "re,im" pairs
// separated by single spaces. 17 significant digits make the format
// lossless for doubles.
inline void save_checkpoint(const std::string& path, const MhdState& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("save_checkpoint: cannot open '" + path +
                       "' for writing");
    const int n = s.n();
    out << "zeitlin-mhd v1 N=" << n << "\n";
    for (const QuantizedField* f : {&s.w, &s.p, &s.q, &s.xi}) {
        const Matrix& m = f->matrix();
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                if (c > 0) out << ' ';
                out << format_double(m(r, c).real()) << ','
                    << format_double(m(r, c).imag());
            }
            out << '\n';
        }
    }
    out.flush();
    if (!out) throw io_error("save_checkpoint: write to '" + path + "' failed");
}

inline MhdState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("load_checkpoint: cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header))
        throw io_error("load_checkpoint: '" + path + "' is empty");
    const std::string magic = "zeitlin-mhd v1 N=";
    int n = 0;
    if (header.rfind(magic, 0) != 0 ||
        !detail::parse_int_token(header.substr(magic.size()), n) || n < 2)
        throw io_error("load_checkpoint: unrecognized header '" + header +
                       "' in '" + path + "'");

    std::vector<Matrix> blocks;
    blocks.reserve(4);
    std::string line, token;
    for (int b = 0; b < 4; ++b) {
        Matrix m(n, n);
        for (int r = 0; r < n; ++r) {
            if (!std::getline(in, line))
                throw io_error("load_checkpoint: '" + path +
                               "' is truncated");
            std::istringstream row(line);
            for (int c = 0; c < n; ++c) {
                if (!(row >> token))
                    throw io_error("load_checkpoint: short row in '" + path +
                                   "'");
                m(r, c) = detail::parse_pair(token, path);
            }
            if (row >> token)
                throw io_error("load_checkpoint: trailing data on a row of '" +
                               path + "'");
        }
        blocks.push_back(std::move(m));
    }
    try {
        return MhdState::of(
            QuantizedField::restored(blocks[0]), QuantizedField::restored(blocks[1]),
            QuantizedField::restored(blocks[2]), QuantizedField::restored(blocks[3]));
    } catch (const usage_error& e) {
        throw io_error("load_checkpoint: '" + path +
                       "' does not hold a valid state: " + e.what());
    }
}

// Diagnostics table, one row per record: t, lambda_1..lambda_N,
// C_1..C_mmax, J_1..J_mmax, K_1..K_mmax, crosshel, H.
inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticsRecord>& records) {
    if (records.empty())
        throw usage_error("write_diagnostics_csv: no records");
    const auto& first = records.front();
    const int n_lambda = static_cast<int>(first.xi_eigenvalues.size());
    const int m_max = static_cast<int>(first.c_m.size());

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("write_diagnostics_csv: cannot open '" + path +
                       "' for writing");
    out << "t";
    for (int i = 1; i <= n_lambda; ++i) out << ",lambda_" << i;
    for (int m = 1; m <= m_max; ++m) out << ",C_" << m;
    for (int m = 1; m <= m_max; ++m) out << ",J_" << m;
    for (int m = 1; m <= m_max; ++m) out << ",K_" << m;
    out << ",crosshel,H\n";

    for (const auto& rec : records) {
        if (rec.xi_eigenvalues.size() != n_lambda ||
            static_cast<int>(rec.c_m.size()) != m_max ||
            static_cast<int>(rec.j_m.size()) != m_max ||
            static_cast<int>(rec.k_m.size()) != m_max)
            throw usage_error("write_diagnostics_csv: inconsistent record layout");
        out << format_double(rec.t);
        for (int i = 0; i < n_lambda; ++i)
            out << ',' << format_double(rec.xi_eigenvalues(i));
        for (double v : rec.c_m) out << ',' << format_double(v);
        for (double v : rec.j_m) out << ',' << format_double(v);
        for (double v : rec.k_m) out << ',' << format_double(v);
        out << ',' << format_double(rec.cross_helicity) << ','
            << format_double(rec.hamiltonian) << '\n';
    }
    out.flush();
    if (!out)
        throw io_error("write_diagnostics_csv: write to '" + path + "' failed");
}

// Machine-readable drift table: one row per monitored series plus a
// final H_relative row carrying the max relative Hamiltonian error.
inline void write_drift_summary_csv(const std::string& path,
                                    const DriftSummary& summary) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("write_drift_summary_csv: cannot open '" + path +
                       "' for writing");
    out << "name,part,drift\n";
    for (const auto& row : summary.rows)
        out << row.name << ',' << row.part << ',' << format_double(row.drift)
            << '\n';
    out << "H_relative,re," << format_double(summary.hamiltonian_relative)
        << '\n';
    out.flush();
    if (!out)
        throw io_error("write_drift_summary_csv: write to '" + path +
                       "' failed");
}

// Human-readable companion of write_drift_summary_csv.
inline void write_drift_summary_text(const std::string& path,
                                     const DriftSummary& summary) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("write_drift_summary_text: cannot open '" + path +
                       "' for writing");
    out << "max |value(t) - value(0)| per monitored series\n\n";
    for (const auto& row : summary.rows) {
        std::ostringstream line;
        line << std::left << std::setw(12) << row.name << std::setw(6)
             << row.part << format_double(row.drift);
        out << line.str() << '\n';
    }
    out << "\nmax relative Hamiltonian error: "
        << format_double(summary.hamiltonian_relative) << '\n';
    out.flush();
    if (!out)
        throw io_error("write_drift_summary_text: write to '" + path +
                       "' failed");
}

// Convergence table: N, quantity, quantized, continuous, abs_error.
inline void write_convergence_csv(const std::string& path,
                                  const ConvergenceStudy& study) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("write_convergence_csv: cannot open '" + path +
                       "' for writing");
    out << "N,quantity,quantized,continuous,abs_error\n";
    for (const auto& row : study.rows)
        out << row.n << ',' << row.quantity << ','
            << format_double(row.quantized) << ','
            << format_double(row.continuous) << ','
            << format_double(row.abs_error) << '\n';
    out.flush();
    if (!out)
        throw io_error("write_convergence_csv: write to '" + path + "' failed");
}

// Fitted log-log slopes of abs_error against N, one line per quantity.
inline void write_slopes_text(const std::string& path,
                              const ConvergenceStudy& study) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("write_slopes_text: cannot open '" + path +
                       "' for writing");
    if (study.slopes.empty()) {
        out << "no slopes: need at least two matrix sizes to fit\n";
    } else {
        out << "least-squares slope of log(abs_error) against log(N)\n\n";
        for (const auto& fit : study.slopes) {
            std::ostringstream line;
            line << std::left << std::setw(12) << fit.quantity;
            if (fit.defined)
                line << format_double(fit.slope);
            else
                line << "undefined (a zero error has no log)";
            out << line.str() << '\n';
        }
    }
    out.flush();
    if (!out)
        throw io_error("write_slopes_text: write to '" + path + "' failed");
}

}  // namespace zeitlin
