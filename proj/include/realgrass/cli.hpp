#pragma once
/**
 * @file cli.hpp
 * @brief The realgrass-cli front end: subcommand parsing, dispatch to the
 *        library, and JSON/CSV run records.
 *
 * Exit codes: 0 success, 1 numerical failure, 2 usage error.
 */

#include <realgrass/edeg.hpp>
#include <realgrass/errors.hpp>
#include <realgrass/incidence.hpp>
#include <realgrass/mc.hpp>
#include <realgrass/stats.hpp>
#include <realgrass/zonoid.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace realgrass::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kRecordVersion = 1;

using Json = nlohmann::ordered_json;

struct RunRecord {
    std::string quantity;
    Json params = Json::object();
    std::optional<double> value;
    std::optional<double> log_value;
    std::optional<double> std_error;
    std::uint64_t n_samples = 0;
    std::uint64_t degenerate_count = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::int64_t runtime_ms = 0;
    std::string tool_version = kToolVersion;

    [[nodiscard]] Json to_json() const
    {
        Json j;
        j["version"] = kRecordVersion;
        j["quantity"] = quantity;
        j["params"] = params;
        j["value"] = value ? Json(*value) : Json(nullptr);
        if (log_value) j["log_value"] = *log_value;
        j["stderr"] = std_error ? Json(*std_error) : Json(nullptr);
        j["n_samples"] = n_samples;
        j["degenerate_count"] = degenerate_count;
        j["seed"] = seed;
        j["method"] = method;
        j["runtime_ms"] = runtime_ms;
        j["tool_version"] = tool_version;
        return j;
    }

    static RunRecord from_json(const Json& j)
    {
        if (j.at("version").get<int>() != kRecordVersion) throw DomainError("RunRecord: unsupported version");
        RunRecord r;
        r.quantity = j.at("quantity").get<std::string>();
        r.params = j.at("params");
        if (!j.at("value").is_null()) r.value = j.at("value").get<double>();
        if (j.contains("log_value")) r.log_value = j.at("log_value").get<double>();
        if (!j.at("stderr").is_null()) r.std_error = j.at("stderr").get<double>();
        r.n_samples = j.at("n_samples").get<std::uint64_t>();
        r.degenerate_count = j.at("degenerate_count").get<std::uint64_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.method = j.at("method").get<std::string>();
        r.runtime_ms = j.at("runtime_ms").get<std::int64_t>();
        r.tool_version = j.at("tool_version").get<std::string>();
        return r;
    }
};

inline RunRecord record_of(const std::string& quantity, const Estimate& e)
{
    RunRecord r;
    r.quantity = quantity;
    r.value = e.value;
    r.std_error = e.std_error;
    r.n_samples = e.n_samples;
    r.degenerate_count = e.degenerate_count;
    r.seed = e.seed;
    r.method = e.method;
    return r;
}

inline RunRecord record_of(const std::string& quantity, const edeg::EdegResult& e)
{
    RunRecord r;
    r.quantity = quantity;
    r.log_value = e.log_value;
    if (e.log_value < specfun::kMaxExpArg) {
        r.value = std::exp(e.log_value);
        r.std_error = e.rel_error * *r.value;
    }
    r.n_samples = e.n_samples;
    r.degenerate_count = e.degenerate_count;
    r.method = edeg::to_string(e.method);
    return r;
}

inline RunRecord exact_record(const std::string& quantity, double value, const std::string& method)
{
    RunRecord r;
    r.quantity = quantity;
    r.value = value;
    r.std_error = 0.0;
    r.method = method;
    return r;
}

/// JSON: one object for a single record, an array otherwise.
inline std::string render_json(const std::vector<RunRecord>& records)
{
    if (records.size() == 1) return records.front().to_json().dump(2) + "\n";
    Json arr = Json::array();
    for (const auto& r : records) arr.push_back(r.to_json());
    return arr.dump(2) + "\n";
}

inline std::string csv_cell(const Json& v)
{
    if (v.is_null()) return "";
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    return v.dump();
}

/// CSV: one row per record; params become param.<key> columns (union over records).
inline std::string render_csv(const std::vector<RunRecord>& records)
{
    const std::vector<std::string> fixed = {"quantity", "method",  "value",            "log_value", "stderr",
                                            "n_samples", "degenerate_count", "seed", "runtime_ms", "tool_version"};
    std::vector<std::string> keys;
    for (const auto& r : records)
        for (const auto& [k, _] : r.params.items())
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    std::ostringstream os;
    for (std::size_t i = 0; i < fixed.size(); ++i) os << (i ? "," : "") << fixed[i];
    for (const auto& k : keys) os << ",param." << k;
    os << "\n";
    for (const auto& r : records) {
        const Json j = r.to_json();
        for (std::size_t i = 0; i < fixed.size(); ++i)
            os << (i ? "," : "") << (j.contains(fixed[i]) ? csv_cell(j[fixed[i]]) : std::string());
        for (const auto& k : keys) os << "," << (r.params.contains(k) ? csv_cell(r.params[k]) : std::string());
        os << "\n";
    }
    return os.str();
}

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace impl {

inline std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw UsageError("bad integer '" + item + "'");
        } catch (const std::logic_error&) {
            throw UsageError("bad integer list '" + s + "'");
        }
    }
    return out;
}

inline zonoid::RadialProfile2 load_or_build_profile(const std::string& path, int grid)
{
    if (path.empty()) return zonoid::build_radial_profile_2(grid);
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read profile file '" + path + "'");
    return zonoid::RadialProfile2::from_json(nlohmann::json::parse(in));
}

} // namespace impl

/// Runs one invocation; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Expected degrees of real Grassmannians and related integral-geometric quantities",
                 "realgrass-cli"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kToolVersion));

    std::uint64_t seed = 42;
    unsigned workers = 1;
    std::uint64_t chunk = 4096;
    std::string format = "json";
    std::string out_path;
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--workers", workers, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    app.add_option("--chunk-size", chunk, "samples per work chunk")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--out", out_path, "write the report to PATH instead of stdout");

    struct Opts {
        int k = 2, n = 4, m = 2, l = 2, d = 2, grid = 2048, quad_points = 32, panels = 16, bins = 30;
        std::uint64_t samples = 100000;
        std::string method, field = "real", r = "1,1,1,1", profile_path, profile_out, lambdas = "4,8,16,32,64,128";
        bool mc = false, numeric = false;
        double eps = 0.01, delta = 0.01;
    } o;

    auto add_samples = [&o](CLI::App* sc) {
        sc->add_option("--samples", o.samples, "Monte Carlo sample count")->check(CLI::PositiveNumber)->capture_default_str();
    };
    auto add_quad = [&o](CLI::App* sc) {
        sc->add_option("--grid", o.grid, "radial profile grid size")->check(CLI::Range(64, 1 << 20))->capture_default_str();
        sc->add_option("--quad-points", o.quad_points, "Gauss-Legendre points per panel")
            ->check(CLI::Range(2, 512))
            ->capture_default_str();
        sc->add_option("--panels", o.panels, "quadrature panels")->check(CLI::Range(1, 4096))->capture_default_str();
        sc->add_option("--profile", o.profile_path, "load a cached radial profile instead of building one");
    };

    auto* c_edeg = app.add_subcommand("edeg", "expected degree of G(k,n)");
    c_edeg->add_option("--k", o.k)->required();
    c_edeg->add_option("--n", o.n)->required();
    o.method = "zonoid_quadrature";
    c_edeg->add_option("--method", o.method)
        ->check(CLI::IsMember({"zonoid_quadrature", "zonoid_vitale", "transversal_mc", "upper_bound"}))
        ->capture_default_str();
    add_samples(c_edeg);
    add_quad(c_edeg);

    auto* c_lines = app.add_subcommand("edeg-lines", "edeg G(2, n+1) by radial quadrature, with the asymptotic");
    c_lines->add_option("--n", o.n)->required();
    add_quad(c_lines);

    auto* c_alpha = app.add_subcommand("alpha", "average scaling factor alpha(k,m)");
    c_alpha->add_option("--k", o.k)->required();
    c_alpha->add_option("--m", o.m)->required();
    c_alpha->add_option("--field", o.field)->check(CLI::IsMember({"real", "complex"}))->capture_default_str();
    add_samples(c_alpha);

    auto* c_trans = app.add_subcommand("transversals", "mean number of real lines meeting four random lines");
    add_samples(c_trans);

    auto* c_rig = app.add_subcommand("rig", "transversals to four unions of r_i random lines");
    c_rig->add_option("--r", o.r, "r1,r2,r3,r4")->capture_default_str();
    add_samples(c_rig);

    auto* c_vol = app.add_subcommand("zonoid-volume", "volume of the Segre zonoid C(k,m)");
    c_vol->add_option("--k", o.k)->required();
    c_vol->add_option("--m", o.m)->required();
    o.method = "zonoid_quadrature";
    std::string vol_method = "quadrature";
    c_vol->add_option("--method", vol_method)->check(CLI::IsMember({"quadrature", "vitale"}))->capture_default_str();
    add_samples(c_vol);
    add_quad(c_vol);

    auto* c_prof = app.add_subcommand("profile-build", "tabulate the radial function of D(2) and cache it");
    c_prof->add_option("--grid", o.grid)->check(CLI::Range(64, 1 << 20))->capture_default_str();
    c_prof->add_option("--out", o.profile_out, "profile file to write")->required();
    c_prof->add_flag("--numeric", o.numeric, "finite-difference gradients instead of the closed form");

    auto* c_dens = app.add_subcommand("density-check", "principal angle density: normalization and goodness of fit");
    c_dens->add_option("--k", o.k)->required();
    c_dens->add_option("--l", o.l)->required();
    c_dens->add_option("--n", o.n)->required();
    c_dens->add_option("--bins", o.bins)->check(CLI::Range(2, 1000))->capture_default_str();
    add_samples(c_dens);

    auto* c_sch = app.add_subcommand("schubert-ratio", "|Sigma(k,n)| / |G(k,n)|");
    c_sch->add_option("--k", o.k)->required();
    c_sch->add_option("--n", o.n)->required();
    c_sch->add_flag("--mc", o.mc, "also estimate by the tube method");
    c_sch->add_option("--eps", o.eps)->capture_default_str();
    c_sch->add_option("--delta", o.delta)->capture_default_str();
    add_samples(c_sch);

    auto* c_vit = app.add_subcommand("vitale", "E|det| of a d x d Gaussian matrix against the closed form");
    c_vit->add_option("--d", o.d)->required();
    add_samples(c_vit);

    auto* c_lap = app.add_subcommand("laplace-demo", "Laplace leading term against quadrature");
    c_lap->add_option("--lambdas", o.lambdas, "comma separated lambda grid")->capture_default_str();
    c_lap->add_option("--grid", o.grid)->check(CLI::Range(64, 1 << 20))->capture_default_str();

    auto* c_bounds = app.add_subcommand("bounds", "upper bound and exponent constants for G(k,n)");
    c_bounds->add_option("--k", o.k)->required();
    c_bounds->add_option("--n", o.n)->required();

    std::vector<std::string> argv_store;
    argv_store.reserve(args.size() + 1);
    argv_store.emplace_back("realgrass-cli");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const ParallelConfig cfg{workers, chunk};
    const RngStream stream{seed, 0};
    std::vector<RunRecord> records;
    const auto t0 = std::chrono::steady_clock::now();

    try {
        if (c_edeg->parsed()) {
            Json params = {{"k", o.k}, {"n", o.n}, {"method", o.method}};
            if (o.method == "transversal_mc") {
                if (!(o.n == 4 && o.k == 2)) throw UsageError("transversal_mc supports only k = 2, n = 4");
                params["samples"] = o.samples;
                records.push_back(record_of("edeg", incidence::edeg24_transversal_mc(stream, o.samples, cfg)));
            } else if (o.method == "upper_bound") {
                records.push_back(record_of("edeg", edeg::edeg_upper_bound_result(o.k, o.n)));
            } else if (o.method == "zonoid_quadrature") {
                params["grid"] = o.grid;
                params["quad_points"] = o.quad_points;
                params["panels"] = o.panels;
                const auto prof = impl::load_or_build_profile(o.profile_path, o.grid);
                edeg::GeneralOptions g;
                g.profile = &prof;
                g.quadrature = {o.quad_points, o.panels};
                records.push_back(record_of("edeg", edeg::edeg_general(o.k, o.n, g)));
            } else {
                params["samples"] = o.samples;
                edeg::GeneralOptions g;
                g.method = edeg::GeneralMethod::zonoid_vitale;
                g.stream = stream;
                g.samples = o.samples;
                g.parallel = cfg;
                auto r = record_of("edeg", edeg::edeg_general(o.k, o.n, g));
                r.seed = seed;
                records.push_back(r);
            }
            records.back().params = params;
        } else if (c_lines->parsed()) {
            const auto prof = impl::load_or_build_profile(o.profile_path, o.grid);
            auto q = record_of("edeg_lines", edeg::edeg_lines_quadrature(o.n, prof, {o.quad_points, o.panels}));
            q.params = {{"n", o.n}, {"ambient", o.n + 1}, {"grid", o.grid}, {"quad_points", o.quad_points},
                        {"panels", o.panels}};
            records.push_back(q);
            edeg::EdegResult a;
            a.k = 2;
            a.n = o.n + 1;
            a.log_value = edeg::log_edeg_lines_asymptotic(o.n);
            a.method = edeg::EdegMethod::asymptotic;
            auto ar = record_of("edeg_lines", a);
            ar.params = {{"n", o.n}, {"ambient", o.n + 1}};
            records.push_back(ar);
        } else if (c_alpha->parsed()) {
            Json params = {{"k", o.k}, {"m", o.m}, {"field", o.field}, {"samples", o.samples}};
            if (o.field == "complex") {
                RunRecord r = record_of("alpha", mc::alpha_complex_mc(o.k, o.m, stream, o.samples, cfg));
                if (o.k * o.m <= 20) {
                    const auto ex = mc::alpha_complex_exact(o.k, o.m);
                    std::ostringstream os;
                    os << ex;
                    params["exact"] = os.str();
                    params["exact_value"] = mc::to_double(ex);
                }
                records.push_back(r);
            } else {
                records.push_back(record_of("alpha", mc::alpha_mc(o.k, o.m, stream, o.samples, cfg)));
            }
            records.back().params = params;
        } else if (c_trans->parsed()) {
            records.push_back(record_of("edeg", incidence::edeg24_transversal_mc(stream, o.samples, cfg)));
            records.back().params = {{"k", 2}, {"n", 4}, {"samples", o.samples}};
        } else if (c_rig->parsed()) {
            const auto rv = impl::parse_int_list(o.r);
            if (rv.size() != 4) throw UsageError("--r needs four comma separated integers");
            const std::array<int, 4> r4 = {rv[0], rv[1], rv[2], rv[3]};
            records.push_back(record_of("rig_union_of_lines", incidence::rig_union_of_lines_mc(r4, stream, o.samples, cfg)));
            records.back().params = {{"r", rv}, {"samples", o.samples}, {"product", rv[0] * rv[1] * rv[2] * rv[3]}};
        } else if (c_vol->parsed()) {
            Json params = {{"k", o.k}, {"m", o.m}, {"method", vol_method}};
            if (vol_method == "quadrature") {
                // C(k,m) and C(m,k) are isometric
                const int m = o.k == 2 ? o.m : (o.m == 2 ? o.k : -1);
                if (m < 0) throw UsageError("zonoid-volume quadrature needs k = 2 or m = 2");
                const auto prof = impl::load_or_build_profile(o.profile_path, o.grid);
                const auto v = zonoid::vol_C_quadrature(m, prof, {o.quad_points, o.panels});
                edeg::EdegResult e;
                e.log_value = v.log_value;
                e.rel_error = v.rel_error;
                RunRecord r = record_of("zonoid_volume", e);
                params["grid"] = o.grid;
                params["quad_points"] = o.quad_points;
                params["panels"] = o.panels;
                records.push_back(r);
            } else {
                params["samples"] = o.samples;
                records.push_back(record_of("zonoid_volume", zonoid::vol_C_vitale_mc(o.k, o.m, stream, o.samples, cfg)));
            }
            records.back().params = params;
        } else if (c_prof->parsed()) {
            const auto prof = zonoid::build_radial_profile_2(
                o.grid, o.numeric ? zonoid::Differentiation::numeric : zonoid::Differentiation::analytic);
            std::ofstream f(o.profile_out);
            if (!f) throw UsageError("cannot write profile file '" + o.profile_out + "'");
            f << prof.to_json().dump() << "\n";
            const double r = prof(specfun::pi / 4);
            records.push_back(exact_record("radial_profile_2", r * r, o.numeric ? "numeric" : "analytic"));
            records.back().params = {{"grid", o.grid},
                                     {"knots", prof.knots().size()},
                                     {"path", o.profile_out},
                                     {"value_is", "r(pi/4)^2"}};
        } else if (c_dens->parsed()) {
            const auto g = mc::density_gof(o.k, o.l, o.n, stream, o.samples, o.bins, cfg);
            RunRecord r;
            r.quantity = "density_gof_l1";
            r.value = g.l1;
            r.n_samples = g.n_samples;
            r.seed = g.seed;
            r.method = "binned_l1";
            r.params = {{"k", o.k}, {"l", o.l}, {"n", o.n}, {"bins", o.bins}, {"samples", o.samples}};
            records.push_back(r);
            records.push_back(exact_record("density_normalization", mc::density_normalization(o.k, o.l, o.n),
                                           "quadrature"));
            records.back().params = {{"k", o.k}, {"l", o.l}, {"n", o.n}};
        } else if (c_sch->parsed()) {
            records.push_back(exact_record("schubert_ratio", mc::schubert_ratio_exact(o.k, o.n), "closed_form"));
            records.back().params = {{"k", o.k}, {"n", o.n}};
            if (o.mc) {
                records.push_back(record_of("schubert_ratio",
                                            mc::schubert_ratio_mc(o.k, o.n, o.eps, o.delta, stream, o.samples, cfg)));
                records.back().params = {{"k", o.k}, {"n", o.n}, {"eps", o.eps}, {"delta", o.delta}, {"samples", o.samples}};
            }
        } else if (c_vit->parsed()) {
            records.push_back(record_of("vitale_abs_det", mc::vitale_check(o.d, stream, o.samples, cfg)));
            records.back().params = {{"d", o.d}, {"samples", o.samples}, {"closed_form", mc::vitale_closed_form(o.d)}};
        } else if (c_lap->parsed()) {
            std::vector<double> lambdas;
            for (int v : impl::parse_int_list(o.lambdas)) {
                if (v <= 0) throw UsageError("--lambdas must be positive");
                lambdas.push_back(v);
            }
            const edeg::LaplaceProblem gauss{.a_at_min = 0.0, .a0 = 1.0, .mu = 2.0, .b0 = 1.0, .nu = 1.0};
            const auto g_rows = edeg::laplace_validate([](double t) { return t * t; }, [](double) { return 1.0; }, 0.0,
                                                       1.0, gauss, lambdas);
            const auto prof = zonoid::build_radial_profile_2(o.grid);
            const auto l_rows = edeg::edeg_lines_laplace_validate(prof, lambdas);
            auto emit = [&records](const std::string& problem, const std::vector<edeg::LaplaceRow>& rows) {
                for (const auto& row : rows) {
                    records.push_back(exact_record("laplace_rel_error", row.rel_error, "gauss_kronrod"));
                    records.back().params = {{"problem", problem},
                                             {"lambda", row.lambda},
                                             {"scaled_quadrature", row.scaled_quadrature},
                                             {"scaled_leading", row.scaled_leading}};
                }
            };
            emit("gaussian_tail", g_rows);
            emit("edeg_lines", l_rows);
        } else if (c_bounds->parsed()) {
            records.push_back(record_of("edeg_upper_bound", edeg::edeg_upper_bound_result(o.k, o.n)));
            records.back().params = {{"k", o.k}, {"n", o.n}};
            records.push_back(exact_record("log_edeg_leading", edeg::log_edeg_leading(o.k, o.n), "closed_form"));
            records.back().params = {{"k", o.k}, {"n", o.n}};
            if (o.k >= 2) {
                records.push_back(exact_record("epsilon_k", edeg::epsilon_k(o.k), "closed_form"));
                records.back().params = {{"k", o.k}};
            }
            if (o.k == 2) {
                RunRecord r;
                r.quantity = "lines_bound";
                r.log_value = (o.n - 2) * std::log(specfun::pi * specfun::pi / 4);
                if (*r.log_value < specfun::kMaxExpArg) r.value = std::exp(*r.log_value);
                r.std_error = 0.0;
                r.method = "closed_form";
                r.params = {{"k", o.k}, {"n", o.n}, {"value_is", "(pi^2/4)^(n-2)"}};
                records.push_back(r);
            }
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedMethod& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 1;
    }

    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : records) {
        r.runtime_ms = ms;
        if (r.n_samples > 0) r.seed = seed;
    }
    const std::string report = format == "csv" ? render_csv(records) : render_json(records);
    if (out_path.empty()) {
        out << report;
    } else {
        std::ofstream f(out_path);
        if (!f) {
            err << "usage error: cannot write '" << out_path << "'\n";
            return 2;
        }
        f << report;
    }
    return 0;
}

} // namespace realgrass::cli
