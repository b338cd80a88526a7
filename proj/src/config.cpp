#include "spatecon/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "spatecon/csv.hpp"
#include "spatecon/dataset.hpp"

namespace spatecon {

std::string YearMonth::label() const
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> out;
    std::string item;
    for (char c : value) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) {
                out.push_back(item);
                item.clear();
            }
        } else {
            item += c;
        }
    }
    if (!item.empty())
        out.push_back(item);
    return out;
}

struct RawConfig {
    // section -> key -> value, with insertion order kept for diagnostics
    std::map<std::string, std::map<std::string, std::string>> sections;
};

RawConfig parse_sections(std::string_view text)
{
    RawConfig raw;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            raw.sections[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": key outside any [section]");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (!raw.sections[section].emplace(key, value).second)
            throw ConfigError(section + "." + key + ": duplicate key");
    }
    return raw;
}

class FieldReader {
public:
    FieldReader(const RawConfig& raw, std::string section) : raw_(raw), section_(std::move(section))
    {
    }

    std::optional<std::string> get(const std::string& key)
    {
        seen_.insert(key);
        auto sec = raw_.sections.find(section_);
        if (sec == raw_.sections.end())
            return std::nullopt;
        auto it = sec->second.find(key);
        if (it == sec->second.end())
            return std::nullopt;
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback)
    {
        auto v = get(key);
        return v ? *v : fallback;
    }

    double number(const std::string& key, double fallback)
    {
        auto v = get(key);
        if (!v)
            return fallback;
        double out;
        auto res = std::from_chars(v->data(), v->data() + v->size(), out);
        if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
            throw ConfigError(path(key) + ": expected a number, got '" + *v + "'");
        return out;
    }

    long long integer(const std::string& key, long long fallback)
    {
        auto v = get(key);
        if (!v)
            return fallback;
        long long out;
        auto res = std::from_chars(v->data(), v->data() + v->size(), out);
        if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
            throw ConfigError(path(key) + ": expected an integer, got '" + *v + "'");
        return out;
    }

    bool boolean(const std::string& key, bool fallback)
    {
        auto v = get(key);
        if (!v)
            return fallback;
        if (*v == "true" || *v == "yes" || *v == "1")
            return true;
        if (*v == "false" || *v == "no" || *v == "0")
            return false;
        throw ConfigError(path(key) + ": expected true/false, got '" + *v + "'");
    }

    std::string path(const std::string& key) const { return section_ + "." + key; }

    /// Every key in the section must have been consumed via get().
    void finish(bool allow_prefixed_groups = false)
    {
        auto sec = raw_.sections.find(section_);
        if (sec == raw_.sections.end())
            return;
        for (const auto& [key, value] : sec->second) {
            if (seen_.contains(key))
                continue;
            if (allow_prefixed_groups && key.rfind("group.", 0) == 0)
                continue;
            throw ConfigError(path(key) + ": unknown key");
        }
    }

private:
    const RawConfig& raw_;
    std::string section_;
    std::set<std::string> seen_;
};

DistanceMetric parse_metric(const std::string& value, const std::string& field)
{
    if (value == "euclidean")
        return DistanceMetric::Euclidean;
    if (value == "arc")
        return DistanceMetric::Arc;
    if (value == "manhattan")
        return DistanceMetric::Manhattan;
    throw ConfigError(field + ": expected euclidean|arc|manhattan, got '" + value + "'");
}

} // namespace

RunConfig parse_run_config(std::string_view text)
{
    RawConfig raw = parse_sections(text);

    static const std::set<std::string> kKnownSections = {"inputs", "weights", "response", "covariates",
                                                         "selection", "local", "forest", "run"};
    for (const auto& [name, _] : raw.sections)
        if (!kKnownSections.contains(name))
            throw ConfigError(name + ": unknown section");

    RunConfig cfg;

    {
        FieldReader r(raw, "inputs");
        cfg.geometry_path = r.get_or("geometry", "");
        cfg.attributes_path = r.get_or("attributes", "");
        cfg.daily_cases_path = r.get_or("daily_cases", "");
        cfg.daily_deaths_path = r.get_or("daily_deaths", "");
        cfg.fips_column = r.get_or("fips_column", "FIPS");
        cfg.geometry_fips_property = r.get_or("geometry_fips_property", "");
        if (auto v = r.get("point_samples")) {
            for (const std::string& entry : split_list(*v)) {
                auto colon = entry.find(':');
                if (colon == std::string::npos || colon == 0 || colon + 1 == entry.size())
                    throw ConfigError("inputs.point_samples: expected NAME:PATH entries, got '" +
                                      entry + "'");
                cfg.point_samples.emplace_back(entry.substr(0, colon), entry.substr(colon + 1));
            }
        }
        cfg.idw_power = r.number("idw_power", 2.0);
        cfg.idw_grid = int(r.integer("idw_grid", 100));
        r.finish();
        if (cfg.geometry_path.empty())
            throw ConfigError("inputs.geometry: required");
        if (cfg.attributes_path.empty())
            throw ConfigError("inputs.attributes: required");
        if (!(cfg.idw_power > 0.0))
            throw ConfigError("inputs.idw_power: must be positive");
        if (cfg.idw_grid < 2)
            throw ConfigError("inputs.idw_grid: must be at least 2");
    }

    {
        FieldReader r(raw, "weights");
        std::string kind = r.get_or("kind", "queen");
        if (kind == "queen")
            cfg.weights_kind = WeightKind::Queen;
        else if (kind == "rook")
            cfg.weights_kind = WeightKind::Rook;
        else if (kind == "distance_band")
            cfg.weights_kind = WeightKind::DistanceBand;
        else
            throw ConfigError("weights.kind: expected queen|rook|distance_band, got '" + kind + "'");
        cfg.weights_metric = parse_metric(r.get_or("metric", "euclidean"), "weights.metric");
        cfg.weights_threshold = r.number("threshold", 0.0);
        cfg.weights_min_neighbors = int(r.integer("min_neighbors", 1));
        cfg.weights_standardize = r.boolean("standardize", true);
        r.finish();
        if (cfg.weights_kind == WeightKind::DistanceBand && !(cfg.weights_threshold > 0.0))
            throw ConfigError("weights.threshold: required and positive for distance_band");
    }

    {
        FieldReader r(raw, "response");
        std::string variable = r.get_or("variable", "");
        if (variable == "cases")
            cfg.response_source = ResponseSource::Cases;
        else if (variable == "deaths")
            cfg.response_source = ResponseSource::Deaths;
        else if (variable.rfind("column:", 0) == 0) {
            cfg.response_source = ResponseSource::Column;
            cfg.response_column = variable.substr(7);
            if (cfg.response_column.empty())
                throw ConfigError("response.variable: empty column name");
        } else if (!variable.empty())
            throw ConfigError("response.variable: expected cases|deaths|column:<name>, got '" + variable + "'");

        std::string agg = r.get_or("aggregation", "cumulative");
        if (agg == "cumulative")
            cfg.aggregation = Aggregation::Cumulative;
        else if (agg == "monthly")
            cfg.aggregation = Aggregation::Monthly;
        else
            throw ConfigError("response.aggregation: expected cumulative|monthly, got '" + agg + "'");

        if (auto v = r.get("through")) {
            try {
                Date::parse(*v); // validate format early
            } catch (const std::exception&) {
                throw ConfigError("response.through: expected YYYY-MM-DD, got '" + *v + "'");
            }
            cfg.through = *v;
        }
        if (auto v = r.get("months")) {
            for (const std::string& m : split_list(*v)) {
                if (m.size() != 7 || m[4] != '-')
                    throw ConfigError("response.months: expected YYYY-MM entries, got '" + m + "'");
                try {
                    Date d = Date::parse(m + "-01");
                    cfg.months.push_back({d.year, d.month});
                } catch (const std::exception&) {
                    throw ConfigError("response.months: invalid month '" + m + "'");
                }
            }
        }
        cfg.per_capita = r.boolean("per_capita", false);
        cfg.population_column = r.get_or("population_column", "");
        cfg.per_capita_scale = r.number("per_capita_scale", 10000.0);
        r.finish();
        if (cfg.per_capita && cfg.population_column.empty())
            throw ConfigError("response.population_column: required when per_capita = true");
    }

    {
        FieldReader r(raw, "covariates");
        if (auto v = r.get("columns"))
            cfg.covariates = split_list(*v);
        r.finish(true);
        auto sec = raw.sections.find("covariates");
        if (sec != raw.sections.end()) {
            for (const auto& [key, value] : sec->second) {
                if (key.rfind("group.", 0) != 0)
                    continue;
                std::string group = key.substr(6);
                if (group.empty())
                    throw ConfigError("covariates." + key + ": empty group name");
                std::vector<std::string> cols = split_list(value);
                if (cols.empty())
                    throw ConfigError("covariates." + key + ": empty group");
                cfg.groups.emplace_back(group, cols);
            }
        }
    }

    {
        FieldReader r(raw, "selection");
        cfg.p_enter = r.number("p_enter", 0.05);
        cfg.vif_cap = r.number("vif_cap", 10.0);
        r.finish();
        if (!(cfg.p_enter > 0.0 && cfg.p_enter < 1.0))
            throw ConfigError("selection.p_enter: must be in (0, 1)");
        if (!(cfg.vif_cap > 1.0))
            throw ConfigError("selection.vif_cap: must exceed 1");
    }

    {
        FieldReader r(raw, "local");
        std::string kernel = r.get_or("kernel", "adaptive_bisquare");
        if (kernel != "adaptive_bisquare")
            throw ConfigError("local.kernel: only adaptive_bisquare is supported");
        std::string bw = r.get_or("bandwidth", "auto");
        if (bw != "auto") {
            long long k;
            auto res = std::from_chars(bw.data(), bw.data() + bw.size(), k);
            if (res.ec != std::errc{} || res.ptr != bw.data() + bw.size() || k < 1)
                throw ConfigError("local.bandwidth: expected auto or a positive integer, got '" + bw + "'");
            cfg.bandwidth = int(k);
        }
        std::string criterion = r.get_or("criterion", "aicc");
        if (criterion != "aicc")
            throw ConfigError("local.criterion: only aicc is supported");
        cfg.local_metric = parse_metric(r.get_or("metric", "euclidean"), "local.metric");
        cfg.bandwidth_intervals = r.boolean("bandwidth_intervals", false);
        cfg.pin_bandwidths = r.boolean("pin_bandwidths", false);
        r.finish();
    }

    {
        FieldReader r(raw, "forest");
        cfg.forest_trees = int(r.integer("n_trees", 500));
        cfg.forest_max_features = int(r.integer("max_features", 0));
        cfg.forest_min_leaf = int(r.integer("min_leaf", 5));
        r.finish();
        if (cfg.forest_trees < 1)
            throw ConfigError("forest.n_trees: must be at least 1");
        if (cfg.forest_min_leaf < 1)
            throw ConfigError("forest.min_leaf: must be at least 1");
    }

    {
        FieldReader r(raw, "run");
        cfg.model = r.get_or("model", "");
        if (!cfg.model.empty()) {
            static const std::set<std::string> kModels = {"model1", "model2", "model3", "model4",
                                                          "select", "importance"};
            if (!kModels.contains(cfg.model))
                throw ConfigError("run.model: expected model1|model2|model3|model4|select|importance, got '" +
                                  cfg.model + "'");
        }
        cfg.output_dir = r.get_or("output_dir", "out");
        long long seed = r.integer("seed", 0);
        if (seed < 0)
            throw ConfigError("run.seed: must be non-negative");
        cfg.seed = std::uint64_t(seed);
        cfg.threads = int(r.integer("threads", 0));
        r.finish();
    }

    return cfg;
}

namespace {

void emit(std::ostringstream& out, const char* key, const std::string& value)
{
    if (!value.empty())
        out << key << " = " << value << '\n';
}

} // namespace

std::string RunConfig::resolved_text() const
{
    std::ostringstream out;
    out << "[inputs]\n";
    emit(out, "geometry", geometry_path);
    emit(out, "attributes", attributes_path);
    emit(out, "daily_cases", daily_cases_path);
    emit(out, "daily_deaths", daily_deaths_path);
    emit(out, "fips_column", fips_column);
    emit(out, "geometry_fips_property", geometry_fips_property);
    if (!point_samples.empty()) {
        out << "point_samples =";
        for (const auto& [name, path] : point_samples)
            out << ' ' << name << ':' << path;
        out << '\n';
        out << "idw_power = " << format_double(idw_power) << '\n';
        out << "idw_grid = " << idw_grid << '\n';
    }

    out << "\n[weights]\n";
    out << "kind = " << to_string(weights_kind) << '\n';
    if (weights_kind == WeightKind::DistanceBand) {
        out << "metric = " << to_string(weights_metric) << '\n';
        out << "threshold = " << format_double(weights_threshold) << '\n';
        out << "min_neighbors = " << weights_min_neighbors << '\n';
    }
    out << "standardize = " << (weights_standardize ? "true" : "false") << '\n';

    out << "\n[response]\n";
    switch (response_source) {
    case ResponseSource::Cases: out << "variable = cases\n"; break;
    case ResponseSource::Deaths: out << "variable = deaths\n"; break;
    case ResponseSource::Column: out << "variable = column:" << response_column << '\n'; break;
    }
    out << "aggregation = " << (aggregation == Aggregation::Cumulative ? "cumulative" : "monthly") << '\n';
    if (through)
        out << "through = " << *through << '\n';
    if (!months.empty()) {
        out << "months =";
        for (const auto& m : months)
            out << ' ' << m.label();
        out << '\n';
    }
    out << "per_capita = " << (per_capita ? "true" : "false") << '\n';
    emit(out, "population_column", population_column);
    if (per_capita)
        out << "per_capita_scale = " << format_double(per_capita_scale) << '\n';

    out << "\n[covariates]\n";
    if (!covariates.empty()) {
        out << "columns =";
        for (const auto& c : covariates)
            out << ' ' << c;
        out << '\n';
    }
    for (const auto& [group, cols] : groups) {
        out << "group." << group << " =";
        for (const auto& c : cols)
            out << ' ' << c;
        out << '\n';
    }

    out << "\n[selection]\n";
    out << "p_enter = " << format_double(p_enter) << '\n';
    out << "vif_cap = " << format_double(vif_cap) << '\n';

    out << "\n[local]\n";
    out << "kernel = adaptive_bisquare\n";
    out << "bandwidth = " << (bandwidth ? std::to_string(*bandwidth) : std::string("auto")) << '\n';
    out << "criterion = aicc\n";
    out << "metric = " << to_string(local_metric) << '\n';
    out << "bandwidth_intervals = " << (bandwidth_intervals ? "true" : "false") << '\n';
    out << "pin_bandwidths = " << (pin_bandwidths ? "true" : "false") << '\n';

    out << "\n[forest]\n";
    out << "n_trees = " << forest_trees << '\n';
    out << "max_features = " << forest_max_features << '\n';
    out << "min_leaf = " << forest_min_leaf << '\n';

    out << "\n[run]\n";
    emit(out, "model", model);
    out << "output_dir = " << output_dir << '\n';
    out << "seed = " << seed << '\n';
    out << "threads = " << threads << '\n';
    return out.str();
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

} // namespace spatecon
