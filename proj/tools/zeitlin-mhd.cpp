// zeitlin-mhd: command-line driver for the isospectral midpoint
// simulator of the axisymmetric MHD-Zeitlin matrix equations.
//
// Subcommands:
//   run          integrate a seeded random initial state, write
//                diagnostics.csv, drift summaries, and a checkpoint
//   resume       continue from a checkpoint file
//   convergence  quantized-versus-continuous Casimir convergence study
//   harmonics    quantized Laplacian spectrum and harmonic cross-checks
//
// Exit codes: 0 ok, 2 usage, 3 numerical failure, 4 I/O.

#include <zeitlin/integrator.hpp>
#include <zeitlin/io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

struct RunOptions {
    int n = 5;
    double dt = 0.01;
    double t_final = 500.0;
    double fp_tol = 1e-14;
    int fp_max_iter = 100;
    std::uint64_t seed = 42;
    int sample_every = 1;
    int m_max = 0;  // 0 means "match N"
    std::string output_dir = ".";
    std::string time_convention = "paper-rescaled";
    std::string config;      // optional key=value file
    std::string checkpoint;  // resume only
};

struct ConvergenceOptions {
    std::vector<int> n_list;
    int lmax = 4;
    int m_max = 3;
    std::uint64_t seed = 777;
    std::string output_dir = ".";
};

struct HarmonicsOptions {
    int n = 5;
    bool check_wigner = false;
    std::string output_dir = ".";
};

std::filesystem::path ensure_output_dir(const std::string& dir) {
    std::filesystem::path p(dir.empty() ? "." : dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec)
        throw zeitlin::io_error("cannot create output directory '" + dir +
                                "': " + ec.message());
    return p;
}

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

// Applies a flat key=value file to a parsed subcommand: each key names
// a flag (without the leading dashes); values for flags already given
// on the command line are ignored, so flags win. '#' starts a comment.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw zeitlin::io_error("cannot open config file '" + path + "'");
    std::vector<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw zeitlin::usage_error("config file '" + path + "' line " +
                                       std::to_string(line_no) +
                                       ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key == "config")
            throw zeitlin::usage_error("config file '" + path + "' line " +
                                       std::to_string(line_no) +
                                       ": bad key '" + key + "'");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw zeitlin::usage_error("config file '" + path +
                                       "': duplicate key '" + key + "'");
        seen.push_back(key);
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw zeitlin::usage_error("config file '" + path +
                                       "': unknown key '" + key + "'");
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

// Integrates s0 over the requested horizon and writes diagnostics.csv,
// drift_summary.txt, drift_summary.csv, and checkpoint_final.txt into
// the output directory. In the physical-hbar convention the scheme
// runs in rescaled time tau = t / hbar (the equations integrated by
// the stepper absorb the 1/hbar of the matrix bracket), so dt and
// t_final are divided by hbar internally and the reported times are
// mapped back to physical t.
int drive_trajectory(const RunOptions& opt, const zeitlin::MhdState& s0,
                     double t_final) {
    const std::filesystem::path dir = ensure_output_dir(opt.output_dir);
    const auto data =
        zeitlin::build_spectral_data(zeitlin::build_generators(s0.n()));

    double h = opt.dt;
    double horizon = t_final;
    double t_scale = 1.0;
    if (opt.time_convention == "physical-hbar") {
        h = opt.dt / data.hbar.value;
        horizon = t_final / data.hbar.value;
        t_scale = data.hbar.value;
    } else if (opt.time_convention != "paper-rescaled") {
        throw zeitlin::usage_error("unknown time convention '" +
                                   opt.time_convention + "'");
    }
    const zeitlin::StepConfig step{h, opt.fp_tol, opt.fp_max_iter};
    const int m_max = opt.m_max == 0 ? s0.n() : opt.m_max;

    std::vector<zeitlin::DiagnosticsRecord> records;
    const zeitlin::MhdState final_state = zeitlin::run_trajectory(
        s0, data, step, horizon, opt.sample_every,
        [&records, t_scale](zeitlin::DiagnosticsRecord rec) {
            rec.t *= t_scale;
            records.push_back(std::move(rec));
        },
        m_max);

    const std::string diagnostics = (dir / "diagnostics.csv").string();
    zeitlin::write_diagnostics_csv(diagnostics, records);
    std::cout << "wrote " << diagnostics << " (" << records.size()
              << " rows)\n";

    if (records.size() >= 2) {
        const zeitlin::DriftSummary summary = zeitlin::drift_report(records);
        zeitlin::write_drift_summary_text((dir / "drift_summary.txt").string(),
                                          summary);
        zeitlin::write_drift_summary_csv((dir / "drift_summary.csv").string(),
                                         summary);
        double casimir_drift = 0.0;
        for (const auto& row : summary.rows)
            if (row.name[0] == 'C' || row.name[0] == 'J' ||
                row.name[0] == 'K' || row.name == "crosshel")
                casimir_drift = std::max(casimir_drift, row.drift);
        std::cout << "wrote " << (dir / "drift_summary.txt").string() << ", "
                  << (dir / "drift_summary.csv").string() << "\n"
                  << "max Casimir drift: "
                  << zeitlin::format_double(casimir_drift)
                  << ", max relative H error: "
                  << zeitlin::format_double(summary.hamiltonian_relative)
                  << "\n";
    } else {
        std::cerr << "warning: fewer than two diagnostic rows; skipping the "
                     "drift summaries\n";
    }

    const std::string checkpoint = (dir / "checkpoint_final.txt").string();
    zeitlin::save_checkpoint(checkpoint, final_state);
    std::cout << "wrote " << checkpoint << "\n";
    return 0;
}

int cmd_run(const RunOptions& opt) {
    return drive_trajectory(opt, zeitlin::random_unit_state(opt.n, opt.seed),
                            opt.t_final);
}

int cmd_resume(const RunOptions& opt) {
    const zeitlin::MhdState s0 = zeitlin::load_checkpoint(opt.checkpoint);
    if (opt.m_max > s0.n())
        throw zeitlin::usage_error("--m-max exceeds the checkpoint's N = " +
                                   std::to_string(s0.n()));
    return drive_trajectory(opt, s0, opt.t_final);
}

// Band-limited field with coefficient (l, m) drawn as N(0,1)/(1+l^2),
// l = 1..lmax; one normal pair per coefficient, first component kept.
zeitlin::BandLimitedField random_band_field(int lmax,
                                            zeitlin::detail::NormalSource& src) {
    zeitlin::BandLimitedField f(lmax);
    for (int l = 1; l <= lmax; ++l) {
        for (int m = -l; m <= l; ++m) {
            double z0 = 0.0, z1 = 0.0;
            src.pair(z0, z1);
            f.at(l, m) = z0 / (1.0 + static_cast<double>(l) * l);
        }
    }
    return f;
}

int cmd_convergence(const ConvergenceOptions& opt) {
    const std::filesystem::path dir = ensure_output_dir(opt.output_dir);
    if (opt.lmax < 1 || opt.lmax > 64)
        throw zeitlin::usage_error("--lmax must be in 1..64");

    zeitlin::detail::NormalSource src(opt.seed);
    const zeitlin::BandLimitedField xi = random_band_field(opt.lmax, src);
    const zeitlin::BandLimitedField rho = random_band_field(opt.lmax, src);
    const zeitlin::BandLimitedField q = random_band_field(opt.lmax, src);
    const zeitlin::BandLimitedField psi = random_band_field(opt.lmax, src);

    const zeitlin::ConvergenceStudy study =
        zeitlin::convergence_study(xi, rho, q, psi, opt.n_list, opt.m_max);

    const std::string table = (dir / "convergence.csv").string();
    const std::string slopes = (dir / "slopes.txt").string();
    zeitlin::write_convergence_csv(table, study);
    zeitlin::write_slopes_text(slopes, study);
    if (opt.n_list.size() < 2)
        std::cerr << "warning: a single matrix size gives an error table but "
                     "no slopes\n";

    std::cout << "wrote " << table << " (" << study.rows.size() << " rows)\n"
              << "wrote " << slopes << "\n";
    for (const auto& fit : study.slopes) {
        std::cout << "slope " << fit.quantity << ": ";
        if (fit.defined)
            std::cout << zeitlin::format_double(fit.slope) << "\n";
        else
            std::cout << "undefined (a zero error has no log)\n";
    }
    return 0;
}

int cmd_harmonics(const HarmonicsOptions& opt) {
    const std::filesystem::path dir = ensure_output_dir(opt.output_dir);
    if (opt.check_wigner && opt.n > 32)
        throw zeitlin::usage_error(
            "--check-wigner uses the 3j route, which supports n <= 32");

    const auto data =
        zeitlin::build_spectral_data(zeitlin::build_generators(opt.n));

    // Per degree l: the eigenvalue of the offset-0 restriction, the
    // multiplicity across diagonal offsets -l..l, and the spread of the
    // per-offset eigenvalues around the offset-0 value.
    std::ostringstream table;
    table << "quantized Laplacian spectrum, N = " << opt.n << "\n\n"
          << "l  eigenvalue  multiplicity  spread\n";
    for (int l = 0; l < opt.n; ++l) {
        const double base = data.eigenvalues[0](l);
        double spread = 0.0;
        int multiplicity = 1;
        for (int m = 1; m <= l; ++m) {
            spread = std::max(
                spread, std::abs(data.eigenvalues[m](l - m) - base));
            multiplicity += 2;
        }
        table << l << "  " << zeitlin::format_double(base) << "  "
              << multiplicity << "  " << zeitlin::format_double(spread)
              << "\n";
    }

    if (opt.check_wigner) {
        double worst = 0.0;
        for (int l = 0; l < opt.n; ++l) {
            for (int m = -l; m <= l; ++m) {
                const zeitlin::Matrix fast =
                    zeitlin::matrix_harmonic(data, l, m);
                const zeitlin::Matrix slow =
                    zeitlin::matrix_harmonic_wigner(opt.n, l, m);
                const zeitlin::Complex overlap =
                    (slow.adjoint() * fast).trace();
                const zeitlin::Complex phase =
                    std::abs(overlap) == 0.0 ? zeitlin::Complex(1.0, 0.0)
                                             : overlap / std::abs(overlap);
                worst = std::max(
                    worst, zeitlin::detail::max_abs(fast - phase * slow));
            }
        }
        table << "\nmax phase-aligned discrepancy against the Wigner-3j "
                 "route: "
              << zeitlin::format_double(worst) << "\n";
        std::cout << "max phase-aligned discrepancy against the Wigner-3j "
                     "route: "
                  << zeitlin::format_double(worst) << "\n";
    }

    const std::string path = (dir / "harmonics.txt").string();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw zeitlin::io_error("cannot open '" + path + "' for writing");
    out << table.str();
    out.flush();
    if (!out) throw zeitlin::io_error("write to '" + path + "' failed");
    std::cout << "wrote " << path << "\n";
    return 0;
}

void add_trajectory_flags(CLI::App* cmd, RunOptions& opt, bool resuming) {
    if (!resuming) {
        cmd->add_option("--n", opt.n, "matrix size N")
            ->check(CLI::Range(2, 4096))
            ->capture_default_str();
        cmd->add_option("--seed", opt.seed, "seed for the random initial state")
            ->capture_default_str();
    }
    cmd->add_option("--dt", opt.dt, "time step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--t-final", opt.t_final,
                    resuming ? "additional horizon to integrate (0 re-emits "
                               "the loaded state)"
                             : "final time (must be a multiple of dt)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--fp-tol", opt.fp_tol,
                    "fixed-point tolerance of the implicit stage")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--fp-max-iter", opt.fp_max_iter,
                    "fixed-point iteration cap")
        ->check(CLI::Range(1, 1000000))
        ->capture_default_str();
    cmd->add_option("--sample-every", opt.sample_every,
                    "record diagnostics every k-th step")
        ->check(CLI::Range(1, 1000000000))
        ->capture_default_str();
    cmd->add_option("--m-max", opt.m_max,
                    "monomial Casimir orders to monitor (0 means N)")
        ->check(CLI::Range(0, 4096))
        ->capture_default_str();
    cmd->add_option("--output-dir", opt.output_dir, "directory for outputs")
        ->capture_default_str();
    cmd->add_option("--config", opt.config,
                    "key=value file mirroring the flag names (flags given on "
                    "the command line win)");
    cmd->add_option("--time-convention", opt.time_convention,
                    "paper-rescaled: dt is a step in rescaled time tau = "
                    "t/hbar; physical-hbar: dt and t-final are physical")
        ->check(CLI::IsMember({"paper-rescaled", "physical-hbar"}))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "zeitlin-mhd: isospectral midpoint simulator for the axisymmetric "
        "MHD-Zeitlin matrix equations"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand(
        "run",
        "integrate a random initial state (standard-normal entries, "
        "skew-projected, de-traced, unit Frobenius norm per field; field k "
        "of W,P,Q,Xi uses seed+k) and write diagnostics");
    add_trajectory_flags(run, run_opt, false);

    RunOptions resume_opt;
    CLI::App* resume = app.add_subcommand(
        "resume",
        "load a checkpoint (its clock restarts at t = 0) and integrate for "
        "--t-final more time");
    resume->add_option("--checkpoint", resume_opt.checkpoint,
                       "checkpoint file to load")
        ->required();
    add_trajectory_flags(resume, resume_opt, true);

    ConvergenceOptions conv_opt;
    CLI::App* conv = app.add_subcommand(
        "convergence",
        "project random band-limited fields (coefficient (l,m) drawn as "
        "N(0,1)/(1+l^2)) at each N and compare quantized Casimirs, "
        "Hamiltonian, and bracket pairing with their continuous values");
    conv->add_option("--n-list", conv_opt.n_list,
                     "comma-separated matrix sizes, strictly ascending, all "
                     "> lmax")
        ->required()
        ->delimiter(',');
    conv->add_option("--lmax", conv_opt.lmax, "band limit of the fields")
        ->check(CLI::Range(1, 64))
        ->capture_default_str();
    conv->add_option("--m-max", conv_opt.m_max, "monomial Casimir orders")
        ->check(CLI::Range(1, 4096))
        ->capture_default_str();
    conv->add_option("--seed", conv_opt.seed, "seed for the random fields")
        ->capture_default_str();
    conv->add_option("--output-dir", conv_opt.output_dir,
                     "directory for outputs")
        ->capture_default_str();

    HarmonicsOptions harm_opt;
    CLI::App* harm = app.add_subcommand(
        "harmonics",
        "write the quantized Laplacian eigenvalue table; optionally "
        "cross-validate the tridiagonal harmonics against the Wigner-3j "
        "construction");
    harm->add_option("--n", harm_opt.n, "matrix size N")
        ->check(CLI::Range(2, 4096))
        ->capture_default_str();
    harm->add_flag("--check-wigner", harm_opt.check_wigner,
                   "compare against the 3j route (n <= 32)");
    harm->add_option("--output-dir", harm_opt.output_dir,
                     "directory for outputs")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) {
            if (!run_opt.config.empty()) apply_config_file(run, run_opt.config);
            return cmd_run(run_opt);
        }
        if (resume->parsed()) {
            if (!resume_opt.config.empty())
                apply_config_file(resume, resume_opt.config);
            return cmd_resume(resume_opt);
        }
        if (conv->parsed()) return cmd_convergence(conv_opt);
        if (harm->parsed()) return cmd_harmonics(harm_opt);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const zeitlin::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const zeitlin::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const zeitlin::numerical_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
