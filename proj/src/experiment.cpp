#include "jumpreach/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jumpreach/support.hpp"

namespace jumpreach {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

Tempering tempering_from_json(const json& j) {
    const std::string kind = j.value("kind", "constant");
    const double c = j.value("c", 1.0);
    if (kind == "constant") return Tempering::constant(c);
    if (kind == "exponential") return Tempering::exponential(j.at("lambda").get<double>(), c);
    if (kind == "truncation") return Tempering::truncation(j.at("R").get<double>(), c);
    throw std::invalid_argument("unknown tempering kind '" + kind + "'");
}

ordered_json tempering_to_json(const json& j) {
    ordered_json out;
    out["kind"] = j.value("kind", "constant");
    out["c"] = j.value("c", 1.0);
    if (out["kind"] == "exponential") out["lambda"] = j.at("lambda").get<double>();
    if (out["kind"] == "truncation") out["R"] = j.at("R").get<double>();
    return out;
}

Representation representation_from_string(const std::string& s) {
    if (s == "compound_poisson") return Representation::compound_poisson;
    if (s == "ito_levy") return Representation::ito_levy;
    throw std::invalid_argument("unknown representation '" + s + "'");
}

IntensityMeasure measure_from_parsed(const json& j);

IntensityMeasure measure_from_parsed(const json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "atomic") {
        const int d = j.at("dimension").get<int>();
        std::vector<AtomEntry> atoms;
        for (const auto& a : j.at("atoms"))
            atoms.push_back({a.at("location").get<Vec>(), a.at("rate").get<double>()});
        const auto rep = representation_from_string(j.value("representation", "compound_poisson"));
        return IntensityMeasure::atomic(d, std::move(atoms), rep);
    }
    if (variant == "radial_polar") {
        const int d = j.at("dimension").get<int>();
        const double alpha = j.at("alpha").get<double>();
        std::vector<RadialDirection> dirs;
        for (const auto& e : j.at("directions"))
            dirs.push_back({e.at("u").get<Vec>(), e.at("weight").get<double>()});
        const auto rep = representation_from_string(j.value("representation", "ito_levy"));
        return IntensityMeasure::radial_polar(d, alpha, std::move(dirs),
                                              tempering_from_json(j.value("tempering", json{})),
                                              rep);
    }
    if (variant == "product") {
        std::vector<IntensityMeasure> comps;
        for (const auto& c : j.at("components")) comps.push_back(measure_from_parsed(c));
        std::optional<Representation> rep;
        if (j.contains("representation"))
            rep = representation_from_string(j.at("representation").get<std::string>());
        return IntensityMeasure::product(std::move(comps), j.at("scales").get<std::vector<double>>(),
                                         rep);
    }
    if (variant == "subordinated_gaussian") {
        return IntensityMeasure::subordinated_gaussian(
            j.at("dimension").get<int>(), j.value("variance", 1.0),
            measure_from_parsed(j.at("subordinator")), j.value("beta0", 0.0));
    }
    if (variant == "subordinated_product") {
        return IntensityMeasure::subordinated_product(measure_from_parsed(j.at("base")),
                                                      measure_from_parsed(j.at("subordinator")),
                                                      j.value("beta0", 0.0));
    }
    throw std::invalid_argument("unknown measure variant '" + variant + "'");
}

ordered_json measure_canonical(const json& j) {
    ordered_json out;
    const std::string variant = j.at("variant").get<std::string>();
    out["variant"] = variant;
    if (variant == "model_default") return out;
    if (variant == "atomic") {
        out["dimension"] = j.at("dimension").get<int>();
        auto atoms = ordered_json::array();
        for (const auto& a : j.at("atoms"))
            atoms.push_back({{"location", a.at("location").get<Vec>()},
                             {"rate", a.at("rate").get<double>()}});
        out["atoms"] = std::move(atoms);
        out["representation"] = j.value("representation", "compound_poisson");
        return out;
    }
    if (variant == "radial_polar") {
        out["dimension"] = j.at("dimension").get<int>();
        out["alpha"] = j.at("alpha").get<double>();
        auto dirs = ordered_json::array();
        for (const auto& e : j.at("directions"))
            dirs.push_back(
                {{"u", e.at("u").get<Vec>()}, {"weight", e.at("weight").get<double>()}});
        out["directions"] = std::move(dirs);
        out["tempering"] = tempering_to_json(j.value("tempering", json{}));
        out["representation"] = j.value("representation", "ito_levy");
        return out;
    }
    if (variant == "product") {
        auto comps = ordered_json::array();
        for (const auto& c : j.at("components")) comps.push_back(measure_canonical(c));
        out["components"] = std::move(comps);
        out["scales"] = j.at("scales").get<std::vector<double>>();
        if (j.contains("representation"))
            out["representation"] = j.at("representation").get<std::string>();
        return out;
    }
    if (variant == "subordinated_gaussian") {
        out["dimension"] = j.at("dimension").get<int>();
        out["variance"] = j.value("variance", 1.0);
        out["subordinator"] = measure_canonical(j.at("subordinator"));
        out["beta0"] = j.value("beta0", 0.0);
        return out;
    }
    if (variant == "subordinated_product") {
        out["base"] = measure_canonical(j.at("base"));
        out["subordinator"] = measure_canonical(j.at("subordinator"));
        out["beta0"] = j.value("beta0", 0.0);
        return out;
    }
    throw std::invalid_argument("unknown measure variant '" + variant + "'");
}

ordered_json estimate_to_json(const MCEstimate& e) {
    ordered_json j;
    j["trials"] = e.trials;
    j["successes"] = e.successes;
    j["point"] = e.point;
    j["lower"] = e.lower;
    j["upper"] = e.upper;
    j["confidence"] = e.confidence;
    j["seed"] = e.seed;
    j["divergent"] = e.divergent;
    return j;
}

SmallJumpMode mode_from_string(const std::string& s) {
    if (s == "drop_with_compensator") return SmallJumpMode::drop_with_compensator;
    if (s == "gaussian_approximation") return SmallJumpMode::gaussian_approximation;
    throw std::invalid_argument("unknown small-jump mode '" + s + "'");
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void append_csv_row(const std::string& out_dir, const std::string& id, const std::string& kind,
                    const MCEstimate& e) {
    const std::filesystem::path p = std::filesystem::path(out_dir) / "results.csv";
    const bool fresh = !std::filesystem::exists(p);
    std::ofstream os(p, std::ios::app);
    if (fresh) os << "# jumpreach-results v1: id,kind,n,k,point,lo,hi,seed,wall_seconds\n";
    os << id << ',' << kind << ',' << e.trials << ',' << e.successes << ',' << e.point << ','
       << e.lower << ',' << e.upper << ',' << e.seed << ',' << e.wall_seconds << '\n';
}

}  // namespace

IntensityMeasure measure_from_json(const std::string& json_text) {
    return measure_from_parsed(json::parse(json_text));
}

std::string measure_canonical_json(const std::string& json_text) {
    return measure_canonical(json::parse(json_text)).dump();
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.kind = j.at("kind").get<std::string>();
        c.measure_json = measure_canonical(j.at("measure")).dump();
        c.model_name = j.at("model").at("name").get<std::string>();
        c.model_params_json = j.at("model").value("params", json::object()).dump();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config field error: ") + e.what() +
                                    " (kind, measure and model are required)");
    }
    c.horizon = j.value("T", 1.0);
    c.dt = j.value("dt", 1e-3);
    c.delta = j.value("delta", 1e-3);
    c.n = j.value("n", static_cast<long long>(10000));
    c.confidence = j.value("confidence", 0.99);
    c.seed = j.value("seed", static_cast<std::uint64_t>(1));
    c.workers = j.value("workers", 0);
    c.small_jump_mode = j.value("small_jump_mode", std::string("drop_with_compensator"));
    c.planner = j.value("planner", std::string("auto"));
    c.budget = j.value("budget", 100000);
    c.verify_samples = j.value("verify_samples", static_cast<long long>(10000));
    c.truncation = j.value("truncation", 40);
    if (j.contains("x0")) c.x0 = j.at("x0").get<Vec>();
    if (j.contains("ball")) {
        c.ball_center = j.at("ball").at("center").get<Vec>();
        c.ball_radius = j.at("ball").at("radius").get<double>();
    }
    if (j.contains("x")) c.pair_x = j.at("x").get<Vec>();
    if (j.contains("y")) c.pair_y = j.at("y").get<Vec>();
    c.certificate_file = j.value("certificate_file", std::string());
    mode_from_string(c.small_jump_mode);
    return c;
}

std::string ExperimentConfig::canonical_json() const {
    ordered_json j;
    j["kind"] = kind;
    j["measure"] = ordered_json::parse(measure_json);
    j["model"] = {{"name", model_name}, {"params", ordered_json::parse(model_params_json)}};
    j["T"] = horizon;
    j["dt"] = dt;
    j["delta"] = delta;
    j["n"] = n;
    j["confidence"] = confidence;
    j["seed"] = seed;
    j["workers"] = workers;
    j["small_jump_mode"] = small_jump_mode;
    j["planner"] = planner;
    j["budget"] = budget;
    j["verify_samples"] = verify_samples;
    j["truncation"] = truncation;
    if (!x0.empty()) j["x0"] = x0;
    if (!ball_center.empty()) j["ball"] = {{"center", ball_center}, {"radius", ball_radius}};
    if (!pair_x.empty()) j["x"] = pair_x;
    if (!pair_y.empty()) j["y"] = pair_y;
    if (!certificate_file.empty()) j["certificate_file"] = certificate_file;
    return j.dump(2);
}

namespace {

PlanResult dispatch_planner(const ExperimentConfig& c, const ModelSpec& model,
                            const IntensityMeasure& measure, const Vec& start, const Vec& target,
                            double eta_bar) {
    if (c.planner == "auto") return plan_auto(model, measure, start, target, eta_bar, c.budget);
    if (c.planner == "additive")
        return plan_additive(model, measure, start, target, eta_bar, std::min(c.budget, 64));
    if (c.planner == "one_step") return plan_one_step_inverse(model, measure, start, target, eta_bar);
    if (c.planner == "coordinatewise")
        return plan_coordinatewise(model, measure, start, target, eta_bar, c.budget);
    if (c.planner == "greedy")
        return plan_greedy_frame(model, measure, start, target, eta_bar, c.budget);
    throw std::invalid_argument("unknown planner '" + c.planner + "'");
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& c, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const ModelSpec model = model_by_name(c.model_name, c.model_params_json);
    const bool use_default_measure =
        json::parse(c.measure_json).at("variant").get<std::string>() == "model_default";
    if (use_default_measure && !model.default_measure)
        throw std::invalid_argument("model '" + c.model_name + "' has no default measure");
    const IntensityMeasure measure =
        use_default_measure ? *model.default_measure : measure_from_json(c.measure_json);
    if (measure.dimension() != model.dimension)
        throw std::invalid_argument("measure and model dimensions disagree");

    Vec x0 = c.x0.empty() ? zeros(model.dimension) : c.x0;
    if (static_cast<int>(x0.size()) != model.dimension)
        throw std::invalid_argument("x0 dimension mismatch");

    ordered_json report;
    report["schema"] = "jumpreach-report v1";
    report["config"] = ordered_json::parse(c.canonical_json());
    report["kind"] = c.kind;
    ExitStatus status = ExitStatus::ok;
    const auto t0 = std::chrono::steady_clock::now();

    if (c.kind == "simulate") {
        const NoiseRealization noise = sample_noise(measure, c.horizon, c.delta,
                                                    mode_from_string(c.small_jump_mode), c.seed);
        const PathRecord path = integrate(model, x0, noise, c.dt, &measure);
        {
            std::ofstream os(std::filesystem::path(out_dir) / "noise.json");
            os << noise_to_json(noise);
        }
        {
            std::ofstream os(std::filesystem::path(out_dir) / "path.csv");
            write_path_csv(path, os);
        }
        report["result"] = {{"terminal", path.terminal()},
                            {"jumps", noise.jumps.size()},
                            {"grid_points", path.times.size()}};
    } else if (c.kind == "plan") {
        if (c.ball_center.empty()) throw std::invalid_argument("plan needs a target ball");
        const double eta_bar = 2.0 * c.ball_radius;
        const PlanResult pr =
            dispatch_planner(c, model, measure, x0, c.ball_center, eta_bar);
        if (pr.feasible()) {
            const auto verify =
                verify_certificate(*pr.certificate, model, measure, c.verify_samples, c.seed);
            std::ofstream os(std::filesystem::path(out_dir) / "certificate.json");
            os << certificate_to_json(*pr.certificate);
            report["result"] = {{"feasible", true},
                                {"steps", pr.certificate->steps()},
                                {"m0", pr.certificate->m0},
                                {"table", certificate_table(*pr.certificate)},
                                {"verified", verify.pass}};
            status = verify.pass ? ExitStatus::ok : ExitStatus::verification_failed;
        } else {
            const char* kind_name = "budget";
            if (pr.failure->kind == PlanFailure::Kind::structural) kind_name = "structural";
            if (pr.failure->kind == PlanFailure::Kind::condition_violation)
                kind_name = "frame-covering-violation";
            if (pr.failure->kind == PlanFailure::Kind::singular) kind_name = "singular-coefficient";
            report["result"] = {{"feasible", false},
                                {"failure_kind", kind_name},
                                {"detail", pr.failure->detail},
                                {"state", pr.failure->state}};
            status = ExitStatus::infeasible;
        }
    } else if (c.kind == "verify-cert") {
        if (c.certificate_file.empty())
            throw std::invalid_argument("verify-cert needs certificate_file");
        std::ifstream is(c.certificate_file);
        if (!is) throw std::invalid_argument("cannot open " + c.certificate_file);
        std::stringstream buf;
        buf << is.rdbuf();
        const JumpChainCertificate cert = certificate_from_json(buf.str());
        const auto verify = verify_certificate(cert, model, measure, c.verify_samples, c.seed);
        report["result"] = {{"structural_pass", verify.structural_pass},
                            {"structural_failure", verify.structural_failure},
                            {"deterministic_available", verify.deterministic_available},
                            {"deterministic_pass", verify.deterministic_pass},
                            {"sampled_pass", verify.sampled_pass},
                            {"samples_per_step", verify.samples_per_step},
                            {"pass", verify.pass}};
        status = verify.pass ? ExitStatus::ok : ExitStatus::verification_failed;
    } else if (c.kind == "estimate-hitting") {
        if (c.ball_center.empty()) throw std::invalid_argument("estimate-hitting needs a ball");
        const MCEstimate e =
            estimate_hitting(model, measure, x0, c.horizon, Ball{c.ball_center, c.ball_radius},
                             c.n, c.dt, c.delta, c.seed, c.confidence, c.workers);
        report["result"] = estimate_to_json(e);
        append_csv_row(out_dir, "estimate-hitting", c.kind, e);
    } else if (c.kind == "estimate-support") {
        if (c.ball_center.empty()) throw std::invalid_argument("estimate-support needs a ball");
        const MCEstimate e =
            estimate_levy_support(measure, c.horizon, c.ball_center, c.ball_radius, c.n, c.delta,
                                  c.seed, c.confidence, c.workers);
        report["result"] = estimate_to_json(e);
        if (measure.variant() == IntensityMeasure::Variant::atomic) {
            const OracleResult o = exact_cp_hitting_oracle(
                measure, c.horizon, Ball{c.ball_center, c.ball_radius}, c.truncation, 1.0);
            report["oracle"] = {{"probability", o.probability},
                                {"tail_bound", o.tail_bound},
                                {"truncation", o.truncation}};
            if (o.probability > 0.0)
                report["suggested_n"] =
                    static_cast<long long>(std::ceil(10.0 / o.probability));
        }
        append_csv_row(out_dir, "estimate-support", c.kind, e);
    } else if (c.kind == "check-support") {
        const SupportReport sr = analyze_support_1d(measure);
        ordered_json conds;
        for (const auto& [name, v] : sr.condition_results)
            conds[name] = {{"result", to_string(v)},
                           {"basis", sr.condition_basis.at(name)}};
        report["result"] = {{"conditions", conds},
                            {"h0_dense", to_string(sr.h0_dense)},
                            {"witness", sr.witness},
                            {"notes", sr.notes}};
    } else if (c.kind == "check-e-property") {
        if (c.pair_x.empty() || c.pair_y.empty())
            throw std::invalid_argument("check-e-property needs x and y");
        const EPropertyReport er = check_e_property(model, measure, c.pair_x, c.pair_y,
                                                    c.horizon, c.n, c.dt, c.delta, c.seed,
                                                    c.workers);
        report["result"] = {{"mean_square", er.mean_square},
                            {"bound_square", er.bound_square},
                            {"slack_factor", er.slack_factor},
                            {"std_error", er.std_error},
                            {"trials", er.trials},
                            {"pass", er.pass}};
    } else {
        throw std::invalid_argument("unknown experiment kind '" + c.kind + "'");
    }

    report["status"] = status == ExitStatus::ok                  ? "ok"
                       : status == ExitStatus::infeasible        ? "infeasible"
                                                                 : "verification-failed";
    report["timing"] = {{"wall_seconds", seconds_since(t0)}};

    RunOutcome out;
    out.status = status;
    out.report_json = report.dump(2);
    const auto path = std::filesystem::path(out_dir) / "report.json";
    std::ofstream os(path);
    os << out.report_json << '\n';
    out.report_path = path.string();
    return out;
}

}  // namespace jumpreach
