#include "ose/cli.hpp"

#include "ose/adversary.hpp"
#include "ose/constructions.hpp"
#include "ose/embedcheck.hpp"
#include "ose/error.hpp"
#include "ose/experiments.hpp"
#include "ose/hardinstances.hpp"
#include "ose/parallel.hpp"
#include "ose/sparsemat.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "CLI11.hpp"

namespace ose::cli {

using detail::format_real;

double parse_real(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return detail::parse_double(text, "real");
    const double num = detail::parse_double(text.substr(0, slash), "fraction numerator");
    const double den = detail::parse_double(text.substr(slash + 1), "fraction denominator");
    require(den != 0.0, ErrorKind::Parse, "fraction with zero denominator");
    return num / den;
}

namespace {

using Header = std::vector<std::pair<std::string, std::string>>;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    out.push_back(cur);
    require(!(out.size() == 1 && out[0].empty()), ErrorKind::Parse, "empty list");
    return out;
}

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> v;
    for (const auto& t : split_list(text)) v.push_back(parse_real(t));
    return v;
}

std::vector<Index> parse_index_list(const std::string& text) {
    std::vector<Index> v;
    for (const auto& t : split_list(text)) v.push_back(detail::parse_u64(t, "list entry"));
    return v;
}

std::string header_text(const std::string& cmd, const Header& h) {
    std::string s = "# ose_cli " + cmd + "\n";
    for (const auto& [k, v] : h) s += "# " + k + " = " + v + "\n";
    return s;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_token(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    in >> tok;
    return tok;
}

// Config comments go right after the format header line.
std::string with_comments(const std::string& body, const std::string& comments) {
    const auto nl = body.find('\n');
    if (nl == std::string::npos) return body + "\n" + comments;
    return body.substr(0, nl + 1) + comments + body.substr(nl + 1);
}

// All outputs are rendered first; each is written to a temp file and renamed
// only after every temp file was written.
void emit(const std::vector<std::pair<std::string, std::string>>& files, std::ostream& out) {
    namespace fs = std::filesystem;
    std::vector<std::pair<fs::path, fs::path>> staged;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& [tmp, dst] : staged) fs::remove(tmp, ec);
    };
    for (const auto& [path, content] : files) {
        if (path.empty() || path == "-") continue;
        const fs::path dst(path);
        fs::path tmp = dst;
        tmp += ".tmp";
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (f) f << content;
        f.close();
        staged.emplace_back(tmp, dst);
        if (!f) {
            cleanup();
            fail(ErrorKind::Io, "cannot write '" + path + "'");
        }
    }
    for (const auto& [tmp, dst] : staged) {
        std::error_code ec;
        fs::rename(tmp, dst, ec);
        if (ec) {
            cleanup();
            fail(ErrorKind::Io, "cannot rename onto '" + dst.string() + "': " + ec.message());
        }
    }
    for (const auto& [path, content] : files)
        if (path.empty() || path == "-") out << content;
}

struct Opts {
    std::string kind;
    std::optional<Index> m, n, s, d, r, ell, ell_prime, c, m_lo, m_hi, n_cap;
    std::string eps, delta, d_list, eta, family, m_grid, m_factor;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::string out, sketch, instance, trace, summary;
    bool force_large_n = false;
};

template <class T>
T need(const std::optional<T>& v, const char* flag) {
    require(v.has_value(), ErrorKind::Parameter, fmt::format("missing required flag {}", flag));
    return *v;
}

std::string need(const std::string& v, const char* flag) {
    require(!v.empty(), ErrorKind::Parameter, fmt::format("missing required flag {}", flag));
    return v;
}

ConstructionSpec construction_from(const Opts& o) {
    ConstructionSpec spec;
    spec.kind = parse_construction_kind(need(o.kind, "--kind"));
    spec.m = need(o.m, "--m");
    spec.n = need(o.n, "--n");
    spec.seed = o.seed;
    if (spec.kind == ConstructionKind::Osnap) spec.s = need(o.s, "--s");
    else if (o.s) spec.s = *o.s;
    if (spec.kind == ConstructionKind::HadamardBlock) spec.eps = parse_real(need(o.eps, "--eps"));
    validate(spec);
    return spec;
}

void describe(Header& h, const ConstructionSpec& spec) {
    h.emplace_back("kind", to_string(spec.kind));
    h.emplace_back("m", std::to_string(spec.m));
    h.emplace_back("n", std::to_string(spec.n));
    h.emplace_back("s", std::to_string(column_sparsity(spec)));
    if (spec.kind == ConstructionKind::HadamardBlock) h.emplace_back("eps", format_real(spec.eps));
    h.emplace_back("seed", std::to_string(spec.seed));
}

Distribution distribution_from(const Opts& o, double eps) {
    Distribution dist;
    dist.family = parse_family(need(o.family, "--family"));
    dist.d = need(o.d, "--d");
    dist.eps = eps;
    if (dist.family == Family::DBeta) dist.r = need(o.r, "--r");
    dist.max_r();  // validates
    return dist;
}

void describe(Header& h, const Distribution& dist) {
    h.emplace_back("family", to_string(dist.family));
    h.emplace_back("d", std::to_string(dist.d));
    if (dist.family == Family::DBeta) h.emplace_back("r", std::to_string(dist.r));
}

// ---------------------------------------------------------------------------

int cmd_gen(const Opts& o, std::ostream& out) {
    const ConstructionSpec spec = construction_from(o);
    Header h;
    describe(h, spec);
    std::ostringstream body;
    if (spec.kind == ConstructionKind::Gaussian) write_ose1d(body, gen_gaussian(spec.m, spec.n, spec.seed));
    else write_ose1(body, generate_sparse(spec));
    emit({{o.out, with_comments(body.str(), header_text("gen", h))}}, out);
    return kOk;
}

int cmd_check(const Opts& o, std::ostream& out) {
    const double eps = parse_real(need(o.eps, "--eps"));
    require(o.trials >= 1, ErrorKind::Parameter, "--trials must be at least 1");
    const Distribution dist = distribution_from(o, eps);
    Header h;
    FailureEstimate est;
    Index m = 0, n = 0;
    if (!o.sketch.empty()) {
        h.emplace_back("sketch", o.sketch);
        const std::string text = slurp(o.sketch);
        std::istringstream in(text);
        if (first_token(text) == "OSE1D") {
            const DenseMatrix pi = read_ose1d(in);
            m = pi.rows();
            n = pi.cols();
            require(dist.d * dist.max_r() <= n, ErrorKind::Infeasible,
                    fmt::format("distribution needs d*r = {} distinct columns but n = {}", dist.d * dist.max_r(), n));
            const auto failures = parallel_count(o.trials, o.threads, [&](std::uint64_t t) {
                const auto [inst, label] = sample(dist, n, derive_seed(o.seed, {t}));
                return !check_embedding(pi, inst, eps).pass;
            });
            est = wilson_estimate(failures, o.trials);
        } else {
            const SketchMatrix pi = read_ose1(in);
            m = pi.rows();
            n = pi.cols();
            est = estimate_failure_prob(pi, dist, eps, o.trials, o.seed, o.threads);
        }
    } else {
        Opts co = o;
        const ConstructionSpec spec = construction_from(co);
        describe(h, spec);
        m = spec.m;
        n = spec.n;
        est = estimate_random_sketch_failure(spec, dist, eps, o.trials, o.seed, o.threads);
    }
    describe(h, dist);
    h.emplace_back("eps", format_real(eps));
    h.emplace_back("trials", std::to_string(o.trials));
    h.emplace_back("seed", std::to_string(o.seed));
    std::string body = header_text("check", h);
    body += failure_csv_header() + "\n";
    body += failure_csv_row(m, n, dist.d, dist.csv_label(), eps, est, o.seed) + "\n";
    emit({{o.out, body}}, out);
    return kOk;
}

int cmd_adversary(const Opts& o, std::ostream& out) {
    const double eps = parse_real(need(o.eps, "--eps"));
    const double eta = parse_real(need(o.eta, "--eta"));
    const SketchMatrix pi = [&] {
        std::istringstream in(slurp(need(o.sketch, "--sketch")));
        return read_ose1(in);
    }();
    Header h;
    h.emplace_back("sketch", o.sketch);
    HardInstance inst;
    if (!o.instance.empty()) {
        h.emplace_back("instance", o.instance);
        std::istringstream in(slurp(o.instance));
        inst = read_instance(in);
    } else {
        const Distribution dist = distribution_from(o, eps);
        describe(h, dist);
        inst = sample(dist, pi.cols(), derive_seed(o.seed, {0})).first;
    }
    const bool general = o.ell.has_value();
    h.emplace_back("eps", format_real(eps));
    h.emplace_back("eta", format_real(eta));
    if (general) {
        h.emplace_back("ell", std::to_string(*o.ell));
        h.emplace_back("ell_prime", std::to_string(need(o.ell_prime, "--ell-prime")));
    }
    h.emplace_back("trials", std::to_string(o.trials));
    h.emplace_back("seed", std::to_string(o.seed));

    const Seed search_seed = derive_seed(o.seed, {1});
    const PairSearchResult res = general
                                     ? find_colliding_pairs_general(pi, inst, eps, *o.ell, *o.ell_prime, eta,
                                                                    search_seed)
                                     : find_colliding_pairs(pi, inst, eps, eta, search_seed);

    std::ostringstream body;
    body << header_text("adversary", h);
    body << "theta: " << format_real(res.thresholds.theta) << '\n';
    body << "good_count: " << res.thresholds.good_count << '\n';
    body << "budget: " << res.thresholds.budget << '\n';
    body << "initial_g: " << res.initial_g.size() << '\n';
    body << "good_selectors: " << res.good_selectors.size() << '\n';
    body << "pairs: " << res.pairs.size() << '\n';
    for (const auto& p : res.pairs)
        body << "pair: " << p.first << ' ' << p.second << " ip=" << format_real(column_inner_product(pi, p.first, p.second))
             << '\n';
    if (!res.pairs.empty()) {
        CollisionCertificate cert = build_witness(pi, inst, res.pairs.front().first, res.pairs.front().second,
                                                  res.thresholds.theta);
        anticoncentration_prob(pi, inst, cert, eps, o.trials, derive_seed(o.seed, {2}));
        write_certificate(body, cert, res.trace.size());
    }
    std::vector<std::pair<std::string, std::string>> files{{o.out, body.str()}};
    if (!o.trace.empty()) {
        std::ostringstream tr;
        tr << header_text("adversary", h);
        write_trace(tr, res);
        files.emplace_back(o.trace, tr.str());
    }
    emit(files, out);
    return kOk;
}

int cmd_sweep(const Opts& o, std::ostream& out) {
    SweepConfig cfg;
    cfg.kind = parse_construction_kind(need(o.kind, "--kind"));
    cfg.s = o.s.value_or(1);
    if (cfg.kind == ConstructionKind::Osnap) cfg.s = need(o.s, "--s");
    cfg.d_list = parse_index_list(need(o.d_list, "--d"));
    cfg.eps_list = parse_real_list(need(o.eps, "--eps"));
    cfg.delta_list = parse_real_list(need(o.delta, "--delta"));
    if (!o.m_grid.empty()) {
        cfg.m_grid = parse_index_list(o.m_grid);
    } else {
        cfg.m_grid = geometric_grid(need(o.m_lo, "--m-lo (or --m-grid)"), need(o.m_hi, "--m-hi"),
                                    parse_real(need(o.m_factor, "--m-factor")));
    }
    cfg.trials_per_point = o.trials;
    cfg.family = parse_family(need(o.family, "--family"));
    if (cfg.family == Family::DBeta) cfg.r = need(o.r, "--r");
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.n_override = o.n;
    if (o.n_cap) cfg.n_cap = *o.n_cap;
    cfg.force_large_n = o.force_large_n;

    const SweepResult res = threshold_sweep(cfg);
    std::ostringstream csv, json;
    write_sweep_csv(csv, cfg, res);
    write_sweep_json(json, cfg, res);
    std::vector<std::pair<std::string, std::string>> files{{o.out, csv.str()}};
    if (!o.summary.empty()) files.emplace_back(o.summary, json.str());
    emit(files, out);
    return kOk;
}

int cmd_audit(const Opts& o, std::ostream& out) {
    const double eps = parse_real(need(o.eps, "--eps"));
    std::istringstream in(slurp(need(o.sketch, "--sketch")));
    const SketchMatrix pi = read_ose1(in);
    Header h{{"sketch", o.sketch}, {"eps", format_real(eps)}};
    std::ostringstream body;
    body << header_text("audit", h);
    write_audit(body, heavy_entry_audit(pi, eps));
    emit({{o.out, body.str()}}, out);
    return kOk;
}

int cmd_demo(const Opts& o, std::ostream& out) {
    const double eps = parse_real(need(o.eps, "--eps"));
    const double delta = parse_real(need(o.delta, "--delta"));
    const Index d = need(o.d, "--d");
    const Index c = o.c.value_or(4);
    const HadamardDemo demo = demo_hadamard_tightness(eps, d, o.trials, o.seed, c, o.n);
    Header h{{"eps", format_real(eps)},
             {"d", std::to_string(d)},
             {"delta", format_real(delta)},
             {"c", std::to_string(c)},
             {"m", std::to_string(demo.m)},
             {"n", std::to_string(demo.n)},
             {"trials", std::to_string(o.trials)},
             {"seed", std::to_string(o.seed)}};
    std::ostringstream body;
    body << header_text("demo", h);
    const auto& e = demo.estimate;
    body << "failures: " << e.failures << '\n';
    body << "p_hat: " << format_real(e.p_hat) << '\n';
    body << "wilson_low: " << format_real(e.wilson_low) << '\n';
    body << "wilson_high: " << format_real(e.wilson_high) << '\n';
    body << "duplicate_prob: " << format_real(demo.duplicate_prob) << '\n';
    body << "duplicate_trials: " << demo.duplicate_trials << '\n';
    body << "max_eps_effective_distinct: " << format_real(demo.max_eps_effective_distinct) << '\n';
    body << "within_delta: " << (e.wilson_high <= delta ? "true" : "false") << '\n';
    emit({{o.out, body.str()}}, out);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse oblivious subspace embeddings: generation, checks, adversarial instances and sweeps",
                 "ose_cli"};
    app.require_subcommand(1);
    Opts o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
        sub->add_option("--out", o.out, "output path (stdout when omitted)");
    };
    auto sketch_params = [&](CLI::App* sub) {
        sub->add_option("--kind", o.kind, "countsketch | osnap | gaussian | hadamard_block");
        sub->add_option("--m", o.m, "rows");
        sub->add_option("--n", o.n, "columns");
        sub->add_option("--s", o.s, "column sparsity (osnap)");
    };
    auto dist_params = [&](CLI::App* sub) {
        sub->add_option("--family", o.family, "dbeta | mix_s1 | mix_general");
        sub->add_option("--d", o.d, "subspace dimension");
        sub->add_option("--r", o.r, "nonzeros per column of U (dbeta)");
    };
    auto threads = [&](CLI::App* sub) {
        sub->add_option("--threads", o.threads, "worker threads; results do not depend on it")->capture_default_str();
    };

    auto* gen = app.add_subcommand("gen", "generate a sketching matrix");
    sketch_params(gen);
    gen->add_option("--eps", o.eps, "distortion (hadamard_block)");
    common(gen);

    auto* check = app.add_subcommand("check", "estimate the failure probability of a sketch");
    check->add_option("--sketch", o.sketch, "OSE1/OSE1D file; omit to draw a fresh sketch per trial");
    sketch_params(check);
    dist_params(check);
    check->add_option("--eps", o.eps, "distortion");
    check->add_option("--trials", o.trials)->capture_default_str();
    threads(check);
    common(check);

    auto* adv = app.add_subcommand("adversary", "run the colliding-pair search");
    adv->add_option("--sketch", o.sketch, "OSE1 file")->required();
    adv->add_option("--instance", o.instance, "OSEINST file; sampled when omitted");
    dist_params(adv);
    adv->add_option("--eps", o.eps);
    adv->add_option("--eta", o.eta);
    adv->add_option("--ell", o.ell, "heaviness level (general search)");
    adv->add_option("--ell-prime", o.ell_prime, "instance level, r = 2^ell'");
    adv->add_option("--trials", o.trials, "Monte Carlo budget for the anti-concentration estimate")
        ->capture_default_str();
    adv->add_option("--trace", o.trace, "trace log path");
    common(adv);

    auto* sweep = app.add_subcommand("sweep", "threshold sweep over an m grid");
    sweep->add_option("--kind", o.kind);
    sweep->add_option("--s", o.s);
    sweep->add_option("--d", o.d_list, "comma-separated d values");
    sweep->add_option("--eps", o.eps, "comma-separated eps values");
    sweep->add_option("--delta", o.delta, "comma-separated delta values");
    sweep->add_option("--m-grid", o.m_grid, "explicit comma-separated m values");
    sweep->add_option("--m-lo", o.m_lo);
    sweep->add_option("--m-hi", o.m_hi);
    sweep->add_option("--m-factor", o.m_factor);
    sweep->add_option("--family", o.family);
    sweep->add_option("--r", o.r);
    sweep->add_option("--n", o.n, "override the auto-sized n");
    sweep->add_option("--n-cap", o.n_cap, "cap on the auto-sized n");
    sweep->add_flag("--force-large-n", o.force_large_n, "allow n above 10^7");
    sweep->add_option("--trials", o.trials, "trials per grid point")->capture_default_str();
    sweep->add_option("--summary", o.summary, "JSON summary path");
    threads(sweep);
    common(sweep);

    auto* audit = app.add_subcommand("audit", "heavy-entry audit of a sketch");
    audit->add_option("--sketch", o.sketch)->required();
    audit->add_option("--eps", o.eps);
    common(audit);

    auto* demo = app.add_subcommand("demo", "Hadamard-block tightness demonstration");
    demo->add_option("--eps", o.eps);
    demo->add_option("--d", o.d);
    demo->add_option("--delta", o.delta);
    demo->add_option("--c", o.c, "m = c d^2 (default 4)");
    demo->add_option("--n", o.n, "columns (default m)");
    demo->add_option("--trials", o.trials)->capture_default_str();
    common(demo);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (gen->parsed()) return cmd_gen(o, out);
        if (check->parsed()) return cmd_check(o, out);
        if (adv->parsed()) return cmd_adversary(o, out);
        if (sweep->parsed()) return cmd_sweep(o, out);
        if (audit->parsed()) return cmd_audit(o, out);
        if (demo->parsed()) return cmd_demo(o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::Infeasible ? kInfeasible : kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace ose::cli
