#include "gna/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace gna {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Experiment execution

void validate(const ExperimentConfig& config)
{
    if (config.schema_version != kConfigSchemaVersion)
        throw ConfigError("config field 'schema_version': expected " +
                          std::to_string(kConfigSchemaVersion) + ", got " +
                          std::to_string(config.schema_version));
    if (config.trials < 1) throw ConfigError("config field 'trials': must be >= 1");
    if (config.algorithms.empty()) throw ConfigError("config field 'algorithms': must not be empty");
    if (config.budgets.empty()) throw ConfigError("config field 'budgets': must not be empty");
    for (std::size_t i = 1; i < config.budgets.size(); ++i)
        if (config.budgets[i] <= config.budgets[i - 1])
            throw ConfigError("config field 'budgets': must be strictly increasing");

    std::size_t k = 0;
    switch (config.instance.type) {
    case InstanceConfig::Type::Gaussian:
        k = config.instance.means.size();
        if (config.instance.sds.size() != k)
            throw ConfigError("config field 'instance.sds': length must match 'instance.means'");
        break;
    case InstanceConfig::Type::Bernoulli: k = config.instance.means.size(); break;
    case InstanceConfig::Type::PaperGenerator: k = config.instance.generator.num_arms; break;
    }
    if (k < 2) throw ConfigError("config field 'instance': need at least 2 arms");
    if (config.budgets.front() < k)
        throw ConfigError("config field 'budgets': every T must be >= K = " + std::to_string(k));

    std::vector<std::string> names;
    for (const auto& spec : config.algorithms) {
        const std::string name = spec.name();
        if (name.find_first_of(",\n\"") != std::string::npos)
            throw ConfigError("config field 'algorithms.name': '" + name +
                              "' contains a reserved character");
        if (std::find(names.begin(), names.end(), name) != names.end())
            throw ConfigError("config field 'algorithms': duplicate algorithm name '" + name + "'");
        names.push_back(name);
    }
}

BanditInstance instance_for_trial(const InstanceConfig& instance, std::uint64_t master_seed,
                                  std::uint64_t trial)
{
    switch (instance.type) {
    case InstanceConfig::Type::Gaussian:
        return make_gaussian_instance(instance.means, instance.sds);
    case InstanceConfig::Type::Bernoulli: return make_bernoulli_instance(instance.means);
    case InstanceConfig::Type::PaperGenerator: {
        RngStream rng(master_seed, instance.fresh_per_trial ? trial : 0,
                      RngStream::Purpose::Instance);
        return paper_instance_generator(instance.generator, rng);
    }
    }
    throw std::logic_error("unhandled instance type");
}

CellSummary make_cell(std::string algorithm, std::size_t budget, std::size_t trials,
                      std::size_t errors)
{
    CellSummary cell;
    cell.algorithm = std::move(algorithm);
    cell.budget = budget;
    cell.trials = trials;
    cell.errors = errors;
    cell.p_hat = trials == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials);
    cell.se = trials == 0 ? 0.0 : std::sqrt(cell.p_hat * (1.0 - cell.p_hat) / static_cast<double>(trials));
    return cell;
}

std::vector<CellSummary> ExperimentSummary::cells_for(const std::string& algorithm) const
{
    std::vector<CellSummary> out;
    for (const auto& c : cells)
        if (c.algorithm == algorithm) out.push_back(c);
    return out;
}

namespace {

struct Tally {
    std::vector<std::uint64_t> errors;  // per cell
    std::vector<std::uint64_t> pulls;   // per cell x arm
};

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config, unsigned workers)
{
    validate(config);
    const std::size_t n_algos = config.algorithms.size();
    const std::size_t n_budgets = config.budgets.size();
    const std::size_t n_cells = n_algos * n_budgets;

    std::optional<BanditInstance> shared;
    if (config.instance.type != InstanceConfig::Type::PaperGenerator ||
        !config.instance.fresh_per_trial)
        shared = instance_for_trial(config.instance, config.master_seed, 0);
    const std::size_t k = shared ? shared->num_arms() : config.instance.generator.num_arms;

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.trials));

    std::vector<Tally> tallies(workers, Tally{std::vector<std::uint64_t>(n_cells, 0),
                                              std::vector<std::uint64_t>(n_cells * k, 0)});
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string error_message;
    constexpr std::size_t kChunk = 16;

    auto work = [&](unsigned id) {
        Tally& tally = tallies[id];
        std::size_t cell = 0;
        std::size_t trial = 0;
        try {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t begin = next.fetch_add(kChunk);
                if (begin >= config.trials) break;
                const std::size_t end = std::min(config.trials, begin + kChunk);
                for (trial = begin; trial < end; ++trial) {
                    const BanditInstance instance =
                        shared ? *shared : instance_for_trial(config.instance, config.master_seed, trial);
                    const std::size_t truth = instance.best_arm();
                    for (std::size_t ai = 0; ai < n_algos; ++ai) {
                        for (std::size_t bi = 0; bi < n_budgets; ++bi) {
                            cell = ai * n_budgets + bi;
                            RngStream rng(config.master_seed, trial);
                            const RunOutcome out =
                                run(config.algorithms[ai], instance, config.budgets[bi], rng);
                            if (out.recommended != truth) ++tally.errors[cell];
                            for (std::size_t a = 0; a < k; ++a) tally.pulls[cell * k + a] += out.counts[a];
                        }
                    }
                }
            }
        } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex);
            if (!failed.exchange(true)) {
                const std::size_t ai = cell / n_budgets;
                error_message = "cell (" + config.algorithms[ai].name() + ", T=" +
                                std::to_string(config.budgets[cell % n_budgets]) + "), trial " +
                                std::to_string(trial) + ": " + e.what();
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
        for (auto& th : pool) th.join();
    }
    if (failed) throw std::runtime_error(error_message);

    ExperimentSummary summary;
    for (std::size_t ai = 0; ai < n_algos; ++ai) {
        for (std::size_t bi = 0; bi < n_budgets; ++bi) {
            const std::size_t cell = ai * n_budgets + bi;
            std::uint64_t errors = 0;
            std::vector<std::uint64_t> pulls(k, 0);
            for (const Tally& t : tallies) {
                errors += t.errors[cell];
                for (std::size_t a = 0; a < k; ++a) pulls[a] += t.pulls[cell * k + a];
            }
            CellSummary c = make_cell(config.algorithms[ai].name(), config.budgets[bi],
                                      config.trials, errors);
            const double denom =
                static_cast<double>(config.trials) * static_cast<double>(config.budgets[bi]);
            c.allocation.resize(k);
            for (std::size_t a = 0; a < k; ++a) c.allocation[a] = static_cast<double>(pulls[a]) / denom;
            summary.cells.push_back(std::move(c));
        }
    }
    std::sort(summary.cells.begin(), summary.cells.end(), [](const auto& x, const auto& y) {
        return std::tie(x.algorithm, x.budget) < std::tie(y.algorithm, y.budget);
    });
    return summary;
}

// ---------------------------------------------------------------------------
// Decay fits

DecayFit fit_decay(const std::vector<DecayPoint>& points)
{
    std::vector<DecayPoint> usable;
    for (const auto& p : points)
        if (p.p_hat > 0.0 && p.p_hat < 1.0) usable.push_back(p);
    if (usable.size() < 3)
        throw std::invalid_argument("decay fit needs at least 3 points with 0 < p_hat < 1, got " +
                                    std::to_string(usable.size()));

    const double n = static_cast<double>(usable.size());
    double mean_t = 0.0;
    double mean_y = 0.0;
    for (const auto& p : usable) {
        mean_t += p.budget;
        mean_y += std::log(p.p_hat);
    }
    mean_t /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& p : usable) {
        const double dx = p.budget - mean_t;
        const double dy = std::log(p.p_hat) - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("decay fit needs distinct budgets");

    DecayFit fit;
    fit.points = usable.size();
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_t;
    double ss_res = 0.0;
    for (const auto& p : usable) {
        const double r = std::log(p.p_hat) - (fit.intercept + fit.slope * p.budget);
        ss_res += r * r;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    fit.slope_se = usable.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;

    bool have_trials = true;
    double var_slope = 0.0;
    for (const auto& p : usable) {
        if (p.trials == 0) {
            have_trials = false;
            break;
        }
        const double c = (p.budget - mean_t) / sxx;
        var_slope += c * c * (1.0 - p.p_hat) / (static_cast<double>(p.trials) * p.p_hat);
    }
    fit.slope_se_binomial = have_trials ? std::sqrt(var_slope) : 0.0;
    return fit;
}

DecayFit fit_decay(const std::vector<CellSummary>& cells)
{
    std::vector<DecayPoint> points;
    points.reserve(cells.size());
    for (const auto& c : cells)
        points.push_back({static_cast<double>(c.budget), c.p_hat, c.trials});
    return fit_decay(points);
}

// ---------------------------------------------------------------------------
// Config serialization

namespace {

std::string instance_type_name(InstanceConfig::Type type)
{
    switch (type) {
    case InstanceConfig::Type::Gaussian: return "gaussian";
    case InstanceConfig::Type::Bernoulli: return "bernoulli";
    case InstanceConfig::Type::PaperGenerator: return "paper_generator";
    }
    return "unknown";
}

const json& require(const json& j, const std::string& key, const std::string& path)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError("config field '" + path + key + "': missing");
    return j.at(key);
}

template <typename T>
T as(const json& v, const std::string& field)
{
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError("");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
                    throw ConfigError("");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("");
        }
        return v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config field '" + field + "': wrong type or value");
    }
}

template <typename T>
std::vector<T> as_array(const json& v, const std::string& field)
{
    if (!v.is_array()) throw ConfigError("config field '" + field + "': expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as<T>(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

AlgorithmSpec parse_algorithm(const json& j, std::size_t index)
{
    const std::string path = "algorithms[" + std::to_string(index) + "].";
    if (!j.is_object()) throw ConfigError("config field 'algorithms[" + std::to_string(index) + "]': expected an object");
    AlgorithmSpec spec;
    const std::string kind = as<std::string>(require(j, "kind", path), path + "kind");
    try {
        spec.kind = algorithm_from_string(kind);
    } catch (const std::invalid_argument&) {
        throw ConfigError("config field '" + path + "kind': unknown algorithm '" + kind + "'");
    }
    if (j.contains("eta")) spec.eta = as<double>(j["eta"], path + "eta");
    if (j.contains("c_mu")) spec.c_mu = as<double>(j["c_mu"], path + "c_mu");
    if (j.contains("w_min")) spec.w_min = as<double>(j["w_min"], path + "w_min");
    if (j.contains("explore")) spec.explore = as<double>(j["explore"], path + "explore");
    if (j.contains("name")) spec.label = as<std::string>(j["name"], path + "name");
    if (j.contains("estimator")) {
        const std::string est = as<std::string>(j["estimator"], path + "estimator");
        try {
            spec.estimator = estimator_from_string(est);
        } catch (const std::invalid_argument&) {
            throw ConfigError("config field '" + path + "estimator': unknown estimator '" + est + "'");
        }
    }
    if (!(spec.eta > 0.0)) throw ConfigError("config field '" + path + "eta': must be > 0");
    if (!(spec.c_mu > 0.0)) throw ConfigError("config field '" + path + "c_mu': must be > 0");
    if (spec.w_min < 0.0) throw ConfigError("config field '" + path + "w_min': must be >= 0");
    if (spec.explore < 0.0) throw ConfigError("config field '" + path + "explore': must be >= 0");
    return spec;
}

InstanceConfig parse_instance(const json& j)
{
    if (!j.is_object()) throw ConfigError("config field 'instance': expected an object");
    InstanceConfig inst;
    const std::string type = as<std::string>(require(j, "type", "instance."), "instance.type");
    if (j.contains("fresh_per_trial"))
        inst.fresh_per_trial = as<bool>(j["fresh_per_trial"], "instance.fresh_per_trial");
    if (type == "gaussian") {
        inst.type = InstanceConfig::Type::Gaussian;
        inst.means = as_array<double>(require(j, "means", "instance."), "instance.means");
        inst.sds = as_array<double>(require(j, "sds", "instance."), "instance.sds");
    } else if (type == "bernoulli") {
        inst.type = InstanceConfig::Type::Bernoulli;
        inst.means = as_array<double>(require(j, "means", "instance."), "instance.means");
    } else if (type == "paper_generator") {
        inst.type = InstanceConfig::Type::PaperGenerator;
        inst.generator.num_arms = as<std::size_t>(require(j, "K", "instance."), "instance.K");
        inst.generator.mu_pattern =
            as<std::string>(require(j, "mu_pattern", "instance."), "instance.mu_pattern");
        inst.generator.sigma_bar =
            as<double>(require(j, "sigma_bar", "instance."), "instance.sigma_bar");
        if (j.contains("distribution_kind")) {
            const std::string fam = as<std::string>(j["distribution_kind"], "instance.distribution_kind");
            try {
                inst.generator.family = family_from_string(fam);
            } catch (const std::invalid_argument&) {
                throw ConfigError("config field 'instance.distribution_kind': unknown family '" + fam + "'");
            }
        }
    } else {
        throw ConfigError("config field 'instance.type': unknown instance type '" + type + "'");
    }
    return inst;
}

json algorithm_to_json(const AlgorithmSpec& spec)
{
    json j;
    j["kind"] = to_string(spec.kind);
    j["eta"] = spec.eta;
    j["c_mu"] = spec.c_mu;
    j["w_min"] = spec.w_min;
    j["explore"] = spec.explore;
    if (!spec.label.empty()) j["name"] = spec.label;
    if (spec.estimator) j["estimator"] = to_string(*spec.estimator);
    return j;
}

json instance_to_json(const InstanceConfig& inst)
{
    json j;
    j["type"] = instance_type_name(inst.type);
    j["fresh_per_trial"] = inst.fresh_per_trial;
    switch (inst.type) {
    case InstanceConfig::Type::Gaussian:
        j["means"] = inst.means;
        j["sds"] = inst.sds;
        break;
    case InstanceConfig::Type::Bernoulli: j["means"] = inst.means; break;
    case InstanceConfig::Type::PaperGenerator:
        j["K"] = inst.generator.num_arms;
        j["mu_pattern"] = inst.generator.mu_pattern;
        j["sigma_bar"] = inst.generator.sigma_bar;
        j["distribution_kind"] = to_string(inst.generator.family);
        break;
    }
    return j;
}

std::string slurp(const std::string& path, const char* what)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(std::string(what) + " not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string fixed6(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    ExperimentConfig config;
    if (j.contains("schema_version"))
        config.schema_version = as<int>(j["schema_version"], "schema_version");
    config.master_seed = as<std::uint64_t>(require(j, "master_seed", ""), "master_seed");
    config.trials = as<std::size_t>(require(j, "trials", ""), "trials");
    const json& algos = require(j, "algorithms", "");
    if (!algos.is_array()) throw ConfigError("config field 'algorithms': expected an array");
    for (std::size_t i = 0; i < algos.size(); ++i)
        config.algorithms.push_back(parse_algorithm(algos[i], i));
    config.instance = parse_instance(require(j, "instance", ""));
    config.budgets = as_array<std::size_t>(require(j, "budgets", ""), "budgets");
    config.output = as<std::string>(require(j, "output", ""), "output");
    if (j.contains("output_json")) config.output_json = as<std::string>(j["output_json"], "output_json");
    validate(config);
    return config;
}

std::string config_to_json(const ExperimentConfig& config)
{
    json j;
    j["schema_version"] = config.schema_version;
    j["master_seed"] = config.master_seed;
    j["trials"] = config.trials;
    j["algorithms"] = json::array();
    for (const auto& spec : config.algorithms) j["algorithms"].push_back(algorithm_to_json(spec));
    j["instance"] = instance_to_json(config.instance);
    j["budgets"] = config.budgets;
    j["output"] = config.output;
    if (!config.output_json.empty()) j["output_json"] = config.output_json;
    return j.dump(2) + "\n";
}

ExperimentConfig read_config(const std::string& path)
{
    return parse_config(slurp(path, "config"));
}

void write_config(const ExperimentConfig& config, const std::string& path)
{
    spill(path, config_to_json(config));
}

// ---------------------------------------------------------------------------
// Results serialization

static constexpr const char* kResultsHeader = "algorithm,T,trials,errors,p_hat,se";

std::string results_csv(const ExperimentSummary& summary)
{
    std::string out = std::string(kResultsHeader) + "\n";
    for (const auto& c : summary.cells) {
        out += c.algorithm + "," + std::to_string(c.budget) + "," + std::to_string(c.trials) + "," +
               std::to_string(c.errors) + "," + fixed6(c.p_hat) + "," + fixed6(c.se) + "\n";
    }
    return out;
}

void write_results(const ExperimentSummary& summary, const std::string& path)
{
    spill(path, results_csv(summary));
}

ExperimentSummary parse_results_csv(std::string_view csv_text)
{
    std::istringstream in{std::string(csv_text)};
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw ConfigError("results line 1: expected header '" + std::string(kResultsHeader) + "'");
    ExperimentSummary summary;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw ConfigError("results line " + std::to_string(line_no) + ": expected 6 fields");
        try {
            CellSummary c = make_cell(fields[0], std::stoul(fields[1]), std::stoul(fields[2]),
                                      std::stoul(fields[3]));
            // Keep the file's rounded values so a re-write is byte-identical.
            c.p_hat = std::stod(fields[4]);
            c.se = std::stod(fields[5]);
            summary.cells.push_back(std::move(c));
        } catch (const std::logic_error&) {
            throw ConfigError("results line " + std::to_string(line_no) + ": malformed number");
        }
    }
    return summary;
}

ExperimentSummary read_results(const std::string& path)
{
    return parse_results_csv(slurp(path, "results file"));
}

std::string results_json(const ExperimentSummary& summary)
{
    json j;
    j["cells"] = json::array();
    std::vector<std::string> algorithms;
    for (const auto& c : summary.cells) {
        j["cells"].push_back({{"algorithm", c.algorithm},
                              {"T", c.budget},
                              {"trials", c.trials},
                              {"errors", c.errors},
                              {"p_hat", c.p_hat},
                              {"se", c.se},
                              {"allocation", c.allocation}});
        if (std::find(algorithms.begin(), algorithms.end(), c.algorithm) == algorithms.end())
            algorithms.push_back(c.algorithm);
    }
    j["decay"] = json::object();
    for (const auto& name : algorithms) {
        try {
            const DecayFit fit = fit_decay(summary.cells_for(name));
            j["decay"][name] = {{"slope", fit.slope},
                                {"intercept", fit.intercept},
                                {"r_squared", fit.r_squared},
                                {"points", fit.points},
                                {"slope_se", fit.slope_se},
                                {"slope_se_binomial", fit.slope_se_binomial}};
        } catch (const std::invalid_argument&) {
            // Too few usable points for this algorithm; no fit to report.
        }
    }
    return j.dump(2) + "\n";
}

void write_results_json(const ExperimentSummary& summary, const std::string& path)
{
    spill(path, results_json(summary));
}

}  // namespace gna
