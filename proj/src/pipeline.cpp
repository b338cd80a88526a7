#include "spatecon/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spatecon/csv.hpp"
#include "spatecon/dataset.hpp"
#include "spatecon/global_models.hpp"
#include "spatecon/importance.hpp"
#include "spatecon/local_models.hpp"
#include "spatecon/selection.hpp"
#include "spatecon/weights.hpp"

namespace spatecon {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Buffers every report in memory, then writes files plus the resolved
/// config and a manifest in one pass.
class OutputCollector {
public:
    explicit OutputCollector(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.output_dir) {}

    void add(const std::string& relative, std::string content)
    {
        files_.emplace_back(relative, std::move(content));
    }

    CommandResult flush(const std::string& command, std::vector<std::string> warnings)
    {
        fs::create_directories(dir_);
        std::string resolved = cfg_.resolved_text();

        json manifest;
        manifest["artifact_version"] = kArtifactVersion;
        manifest["command"] = command;
        manifest["config_hash"] = hex64(fnv1a64(resolved));
        manifest["seed"] = cfg_.seed;
        manifest["threads"] = cfg_.threads;
        manifest["warnings"] = warnings;
        json outputs = json::array();

        CommandResult result;
        result.warnings = std::move(warnings);
        for (const auto& [relative, content] : files_) {
            fs::path target = dir_ / relative;
            if (target.has_parent_path())
                fs::create_directories(target.parent_path());
            std::ofstream out(target, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot write file: " + target.string());
            out << content;
            outputs.push_back({{"path", relative},
                               {"bytes", content.size()},
                               {"fnv1a64", hex64(fnv1a64(content))}});
            result.outputs.push_back(relative);
        }
        manifest["outputs"] = outputs;

        {
            std::ofstream out(dir_ / "config.resolved.ini", std::ios::binary);
            out << resolved;
            result.outputs.push_back("config.resolved.ini");
        }
        {
            std::ofstream out(dir_ / "manifest.json", std::ios::binary);
            out << manifest.dump(2) << '\n';
            result.outputs.push_back("manifest.json");
        }
        return result;
    }

private:
    const RunConfig& cfg_;
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

struct LoadedInputs {
    SpatialDataset ds;
    JoinReport join_report;
    std::vector<DailySeries> cases;
    std::vector<DailySeries> deaths;
};

ExecSpec make_exec(const RunConfig& cfg)
{
    ExecSpec exec;
    exec.mode = Exec::OpenMP;
    exec.threads = cfg.threads;
    return exec;
}

PointSamples parse_point_samples_csv(std::string_view text)
{
    CsvTable table = parse_csv(text);
    std::size_t lon_col = table.require_column("lon");
    std::size_t lat_col = table.require_column("lat");
    std::size_t value_col = table.require_column("value");
    PointSamples samples;
    auto number = [](const std::string& cell) {
        double v;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
            throw std::runtime_error("point samples: non-numeric cell '" + cell + "'");
        return v;
    };
    for (const auto& row : table.rows)
        samples.points.push_back({number(row[lon_col]), number(row[lat_col]), number(row[value_col])});
    return samples;
}

/// Preprocessing chain for point-sampled sources: interpolate to a raster
/// over the dataset's bounding box, then reduce to one mean per county and
/// append it as an attribute column.
void append_point_sample_columns(const RunConfig& cfg, SpatialDataset& ds, const ExecSpec& exec)
{
    if (cfg.point_samples.empty())
        return;

    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    bool first = true;
    for (const auto& feature : ds.features)
        for (const auto& ring : feature.polygon.rings)
            for (const auto& p : ring.points) {
                if (first) {
                    min_x = max_x = p.lon;
                    min_y = max_y = p.lat;
                    first = false;
                } else {
                    min_x = std::min(min_x, p.lon);
                    max_x = std::max(max_x, p.lon);
                    min_y = std::min(min_y, p.lat);
                    max_y = std::max(max_y, p.lat);
                }
            }
    double span = std::max(max_x - min_x, max_y - min_y);
    if (!(span > 0.0))
        throw std::runtime_error("point samples: degenerate dataset extent");
    double step = span / double(cfg.idw_grid);

    GridSurface surface;
    surface.dx = step;
    surface.dy = step;
    surface.x0 = min_x + step / 2.0;
    surface.y0 = min_y + step / 2.0;
    surface.nx = std::size_t((max_x - min_x) / step) + 1;
    surface.ny = std::size_t((max_y - min_y) / step) + 1;

    std::vector<LonLat> centers;
    centers.reserve(surface.nx * surface.ny);
    for (std::size_t j = 0; j < surface.ny; ++j)
        for (std::size_t i = 0; i < surface.nx; ++i)
            centers.push_back(surface.cell_center(i, j));

    for (const auto& [name, path] : cfg.point_samples) {
        if (ds.column(name))
            throw ConfigError("inputs.point_samples: column '" + name + "' already exists");
        PointSamples samples = parse_point_samples_csv(read_file(path));
        surface.values = idw_interpolate(samples, centers, cfg.idw_power, exec);

        arma::vec means(ds.n());
        std::atomic<long> failed_at{-1};
        auto one = [&](std::size_t i) {
            try {
                means(i) = zonal_mean(surface, ds.features[i].polygon);
            } catch (const std::exception&) {
                long expected = -1;
                failed_at.compare_exchange_strong(expected, long(i));
            }
        };
        const long nl = static_cast<long>(ds.n());
        if (exec.mode == Exec::OpenMP) {
#pragma omp parallel for schedule(dynamic, 8) num_threads(exec.resolved_threads())
            for (long i = 0; i < nl; ++i)
                one(std::size_t(i));
        } else {
            for (long i = 0; i < nl; ++i)
                one(std::size_t(i));
        }
        if (failed_at.load() >= 0)
            throw std::runtime_error("point samples: county " +
                                     ds.features[std::size_t(failed_at.load())].fips.value() +
                                     " has no interior raster cell; raise inputs.idw_grid");
        ds.attribute_names.push_back(name);
        ds.attributes = arma::join_rows(ds.attributes, means);
    }
}

LoadedInputs load_inputs(const RunConfig& cfg, bool need_cases, bool need_deaths)
{
    LoadedInputs in;
    LoadOptions opts;
    opts.geometry_fips_property = cfg.geometry_fips_property;
    in.ds = load_dataset(read_file(cfg.geometry_path), read_file(cfg.attributes_path),
                         cfg.fips_column, &in.join_report, opts);
    append_point_sample_columns(cfg, in.ds, make_exec(cfg));
    if (need_cases) {
        if (cfg.daily_cases_path.empty())
            throw ConfigError("inputs.daily_cases: required for this response");
        in.cases = parse_daily_series_csv(read_file(cfg.daily_cases_path));
    }
    if (need_deaths) {
        if (cfg.daily_deaths_path.empty())
            throw ConfigError("inputs.daily_deaths: required for this response");
        in.deaths = parse_daily_series_csv(read_file(cfg.daily_deaths_path));
    }
    return in;
}

const std::vector<DailySeries>& pick_series(const LoadedInputs& in, ResponseSource source)
{
    return source == ResponseSource::Deaths ? in.deaths : in.cases;
}

struct ResponseBuild {
    arma::vec values; // aligned to dataset rows, NaN = unavailable
    std::vector<std::string> warnings;
};

void apply_per_capita(const RunConfig& cfg, const SpatialDataset& ds, ResponseBuild& build)
{
    if (!cfg.per_capita)
        return;
    auto pop_lookup = ds.column(cfg.population_column);
    if (!pop_lookup)
        throw ConfigError("response.population_column: no attribute column '" + cfg.population_column +
                          "'");
    std::size_t pop_col = *pop_lookup;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double pop = ds.attributes(i, pop_col);
        if (std::isnan(build.values(i)))
            continue;
        if (std::isnan(pop) || !(pop > 0.0)) {
            build.values(i) = NAN;
            build.warnings.push_back("per_capita: invalid population for " + ds.features[i].fips.value());
            continue;
        }
        build.values(i) = per_capita(build.values(i), pop, cfg.per_capita_scale);
    }
}

ResponseBuild build_response_from_series(const RunConfig& cfg, const SpatialDataset& ds,
                                         const std::vector<DailySeries>& series,
                                         const std::optional<YearMonth>& month)
{
    ResponseBuild build;
    build.values.set_size(ds.n());
    build.values.fill(NAN);

    std::map<std::string, const DailySeries*> by_fips;
    for (const auto& s : series)
        by_fips[s.fips.value()] = &s;

    std::optional<Date> through;
    if (!month) {
        if (cfg.through) {
            through = Date::parse(*cfg.through);
        } else {
            for (const auto& s : series)
                if (!through || through < s.dates.back())
                    through = s.dates.back();
        }
        if (!through)
            throw std::runtime_error("response: daily series input is empty");
    }

    std::size_t missing = 0, no_overlap = 0, negative = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        auto it = by_fips.find(ds.features[i].fips.value());
        if (it == by_fips.end()) {
            ++missing;
            continue;
        }
        if (month) {
            MonthlyTotal total = monthly_total(*it->second, month->year, month->month);
            build.values(i) = total.total;
            if (total.no_overlap)
                ++no_overlap;
        } else {
            build.values(i) = cumulative_total(*it->second, *through);
            // downward revisions in the dailies can drive a total negative
            if (build.values(i) < 0.0)
                ++negative;
        }
    }
    if (negative > 0)
        build.warnings.push_back("response: " + std::to_string(negative) +
                                 " counties have a negative cumulative total");
    if (missing > 0)
        build.warnings.push_back("response: " + std::to_string(missing) +
                                 " counties lack a daily series and were dropped");
    if (no_overlap > 0)
        build.warnings.push_back("response: " + std::to_string(no_overlap) +
                                 " counties reported no data in " + month->label() +
                                 " (monthly total 0)");
    apply_per_capita(cfg, ds, build);
    return build;
}

ResponseBuild build_response(const RunConfig& cfg, const LoadedInputs& in,
                             const std::optional<YearMonth>& month = std::nullopt)
{
    if (cfg.response_source == ResponseSource::Column) {
        if (cfg.response_column.empty())
            throw ConfigError("response.variable: required");
        ResponseBuild build;
        auto col = in.ds.column(cfg.response_column);
        if (!col)
            throw ConfigError("response.variable: no attribute column '" + cfg.response_column + "'");
        build.values = in.ds.attributes.col(*col);
        apply_per_capita(cfg, in.ds, build);
        return build;
    }
    return build_response_from_series(cfg, in.ds, pick_series(in, cfg.response_source), month);
}

struct ModelFrame {
    SpatialDataset ds; // complete rows only
    DesignMatrix design;
    arma::vec y;
    std::size_t dropped = 0;
};

ModelFrame build_frame(const SpatialDataset& full, const std::vector<std::string>& covariates,
                       const arma::vec& response)
{
    if (covariates.empty())
        throw ConfigError("covariates.columns: required for this command");
    std::vector<std::size_t> cols;
    for (const auto& name : covariates) {
        auto c = full.column(name);
        if (!c)
            throw ConfigError("covariates.columns: no attribute column '" + name + "'");
        cols.push_back(*c);
    }

    std::vector<std::uint32_t> keep;
    for (std::size_t i = 0; i < full.n(); ++i) {
        bool complete = std::isfinite(response(i));
        for (std::size_t c : cols)
            complete = complete && std::isfinite(full.attributes(i, c));
        if (complete)
            keep.push_back(std::uint32_t(i));
    }
    if (keep.empty())
        throw std::runtime_error("model frame: no complete rows for the selected columns");

    ModelFrame frame;
    frame.ds = subset_dataset(full, keep);
    frame.dropped = full.n() - keep.size();
    arma::mat covs(keep.size(), covariates.size());
    frame.y.set_size(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        frame.y(r) = response(keep[r]);
        for (std::size_t j = 0; j < cols.size(); ++j)
            covs(r, j) = full.attributes(keep[r], cols[j]);
    }
    frame.design = DesignMatrix::from_columns(covariates, covs);
    return frame;
}

WeightMatrix build_weights(const RunConfig& cfg, const SpatialDataset& ds, const ExecSpec& exec)
{
    if (cfg.weights_kind == WeightKind::DistanceBand)
        return distance_band_weights(ds, cfg.weights_metric, cfg.weights_threshold,
                                     cfg.weights_min_neighbors, exec);
    return contiguity_weights(ds, cfg.weights_kind, exec);
}

// ---------------------------------------------------------------------------
// report writers

constexpr const char* kNA = "---";

std::string global_fits_csv(const std::string& response_name, const GlobalFit& ols,
                            const GlobalFit* slm, const GlobalFit* sem)
{
    CsvWriter w;
    w.cell("variable")
        .cell("ols_coefficient").cell("ols_t_statistic").cell("ols_probability")
        .cell("slm_coefficient").cell("slm_z_statistic").cell("slm_probability")
        .cell("sem_coefficient").cell("sem_z_statistic").cell("sem_probability")
        .endrow();

    auto cell3 = [&](double a, double b, double c, bool present) {
        if (present) {
            w.cell(a).cell(b).cell(c);
        } else {
            w.cell(kNA).cell(kNA).cell(kNA);
        }
    };

    // spatially lagged response (rho) first, matching the published layout
    w.cell("W_" + response_name);
    cell3(0, 0, 0, false);
    if (slm)
        w.cell(slm->rho).cell(slm->rho_z).cell(slm->rho_probability);
    else
        w.cell(kNA).cell(kNA).cell(kNA);
    cell3(0, 0, 0, false);
    w.endrow();

    for (std::size_t j = 0; j < ols.coefficient_names.size(); ++j) {
        w.cell(ols.coefficient_names[j]);
        w.cell(ols.coefficients(j)).cell(ols.t_or_z(j)).cell(ols.probabilities(j));
        if (slm)
            w.cell(slm->coefficients(j)).cell(slm->t_or_z(j)).cell(slm->probabilities(j));
        else
            cell3(0, 0, 0, false);
        if (sem)
            w.cell(sem->coefficients(j)).cell(sem->t_or_z(j)).cell(sem->probabilities(j));
        else
            cell3(0, 0, 0, false);
        w.endrow();
    }

    w.cell("LAMBDA");
    cell3(0, 0, 0, false);
    cell3(0, 0, 0, false);
    if (sem)
        w.cell(sem->lambda).cell(sem->lambda_z).cell(sem->lambda_probability);
    else
        cell3(0, 0, 0, false);
    w.endrow();

    auto stat = [&](const char* label, double o, double s, double e) {
        w.cell(label);
        if (std::isfinite(o))
            w.cell(o);
        else
            w.cell(kNA);
        w.cell("").cell("");
        if (slm && std::isfinite(s))
            w.cell(s);
        else
            w.cell(kNA);
        w.cell("").cell("");
        if (sem && std::isfinite(e))
            w.cell(e);
        else
            w.cell(kNA);
        w.cell("").cell("");
        w.endrow();
    };
    stat("R2", ols.stats.r2, slm ? slm->stats.r2 : NAN, sem ? sem->stats.r2 : NAN);
    stat("Adj_R2", ols.stats.adj_r2, NAN, NAN);
    stat("F", ols.stats.f_stat, NAN, NAN);
    stat("P", ols.stats.f_prob, NAN, NAN);
    stat("Log_Likelihood", ols.log_likelihood, slm ? slm->log_likelihood : NAN,
         sem ? sem->log_likelihood : NAN);
    stat("AIC", ols.stats.aic, slm ? slm->stats.aic : NAN, sem ? sem->stats.aic : NAN);
    stat("SIC", ols.stats.sic, slm ? slm->stats.sic : NAN, sem ? sem->stats.sic : NAN);
    return w.str();
}

std::string diagnostics_csv(const DependenceDiagnostics& diag, bool spatial_models_indicated)
{
    CsvWriter w;
    w.cell("test").cell("mi_df").cell("value").cell("probability").endrow();
    w.cell("Moran's I (error)")
        .cell(diag.morans_i_error.statistic)
        .cell(diag.morans_i_error.z_value)
        .cell(diag.morans_i_error.probability)
        .endrow();
    auto row = [&](const char* name, const TestStat& t) {
        w.cell(name).cell((long long)std::llround(t.df)).cell(t.value).cell(t.probability).endrow();
    };
    row("Lagrange Multiplier (lag)", diag.lm_lag);
    row("Robust LM (lag)", diag.robust_lm_lag);
    row("Lagrange Multiplier (error)", diag.lm_error);
    row("Robust LM (error)", diag.robust_lm_error);
    row("Lagrange Multiplier (SARMA)", diag.lm_sarma);
    w.cell("spatial models indicated").cell("").cell(spatial_models_indicated ? "yes" : "not indicated").cell("").endrow();
    return w.str();
}

std::string local_summary_csv(const std::vector<std::string>& labels,
                              const std::vector<const GwrFit*>& gwr,
                              const std::vector<const MgwrFit*>& mgwr)
{
    CsvWriter w;
    w.cell("model")
        .cell("gwr_r2").cell("mgwr_r2")
        .cell("gwr_adj_r2").cell("mgwr_adj_r2")
        .cell("gwr_adj_alpha").cell("gwr_critical_t")
        .cell("gwr_aic").cell("mgwr_aic")
        .cell("gwr_aicc").cell("mgwr_aicc")
        .cell("gwr_bic").cell("mgwr_bic")
        .cell("gwr_bandwidth").cell("mgwr_bandwidths")
        .cell("gwr_hat_trace").cell("mgwr_hat_trace")
        .cell("mgwr_iterations").cell("mgwr_converged")
        .endrow();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const GwrFit* g = gwr[i];
        const MgwrFit* m = mgwr[i];
        w.cell(labels[i]);
        if (!g || !m) {
            for (int c = 0; c < 18; ++c)
                w.cell(kNA);
            w.endrow();
            continue;
        }
        std::string bandwidths;
        for (std::size_t j = 0; j < m->covariate_bandwidths.size(); ++j) {
            if (j)
                bandwidths += ' ';
            bandwidths += std::to_string(m->covariate_bandwidths[j]);
        }
        w.cell(g->r2).cell(m->r2)
            .cell(g->adj_r2).cell(m->adj_r2)
            .cell(g->adj_alpha).cell(g->critical_t)
            .cell(g->aic).cell(m->aic)
            .cell(g->aicc).cell(m->aicc)
            .cell(g->bic).cell(m->bic)
            .cell((long long)g->bandwidth).cell(bandwidths)
            .cell(g->hat_trace).cell(m->hat_trace)
            .cell((long long)m->backfit_iterations).cell(m->converged ? "true" : "false")
            .endrow();
    }
    return w.str();
}

std::string local_surfaces_csv(const SpatialDataset& ds, const DesignMatrix& X, const GwrFit& gwr,
                               const MgwrFit& mgwr, const LocalCollinearity* collinearity)
{
    CsvWriter w;
    w.cell("FIPS").cell("lon").cell("lat");
    auto names = [&](const char* prefix) {
        w.cell(std::string(prefix) + "_CONSTANT");
        for (const auto& name : X.names)
            w.cell(std::string(prefix) + "_" + name);
        w.cell(std::string(prefix) + "_local_r2");
    };
    names("gwr");
    names("mgwr");
    if (collinearity)
        w.cell("collinearity_flag");
    w.endrow();
    for (std::size_t i = 0; i < ds.n(); ++i) {
        w.cell(ds.features[i].fips.value());
        w.cell(ds.features[i].centroid.lon).cell(ds.features[i].centroid.lat);
        for (std::size_t j = 0; j < X.p() + 1; ++j)
            w.cell(gwr.local_coefficients(i, j));
        w.cell(gwr.local_r2(i));
        for (std::size_t j = 0; j < X.p() + 1; ++j)
            w.cell(mgwr.local_coefficients(i, j));
        w.cell(mgwr.local_r2(i));
        if (collinearity)
            w.cell(collinearity->flagged[i] ? "1" : "0");
        w.endrow();
    }
    return w.str();
}

std::string local_collinearity_csv(const SpatialDataset& ds, const DesignMatrix& X,
                                   const LocalCollinearity& lc)
{
    CsvWriter w;
    w.cell("FIPS").cell("condition_number");
    for (const auto& name : X.names)
        w.cell("vif_" + name);
    w.cell("max_vdp").cell("flagged").endrow();
    for (std::size_t i = 0; i < ds.n(); ++i) {
        w.cell(ds.features[i].fips.value());
        w.cell(lc.condition_number(i));
        for (std::size_t j = 0; j < X.p(); ++j)
            w.cell(lc.local_vif(i, j));
        w.cell(lc.vdp[i].max());
        w.cell(lc.flagged[i] ? "1" : "0");
        w.endrow();
    }
    return w.str();
}

std::string local_surfaces_geojson(const SpatialDataset& ds, const DesignMatrix& X,
                                   const GwrFit& gwr, const MgwrFit& mgwr)
{
    SpatialDataset enriched = ds;
    const std::size_t m = X.p() + 1;
    std::vector<std::string> extra;
    for (const char* prefix : {"gwr", "mgwr"}) {
        extra.push_back(std::string(prefix) + "_CONSTANT");
        for (const auto& name : X.names)
            extra.push_back(std::string(prefix) + "_" + name);
        extra.push_back(std::string(prefix) + "_local_r2");
    }
    arma::mat values(ds.n(), extra.size());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < m; ++j)
            values(i, c++) = gwr.local_coefficients(i, j);
        values(i, c++) = gwr.local_r2(i);
        for (std::size_t j = 0; j < m; ++j)
            values(i, c++) = mgwr.local_coefficients(i, j);
        values(i, c++) = mgwr.local_r2(i);
    }
    enriched.attribute_names.insert(enriched.attribute_names.end(), extra.begin(), extra.end());
    enriched.attributes = arma::join_rows(enriched.attributes, values);
    return to_geojson(enriched);
}

std::string bins_csv(const std::vector<std::string>& labels,
                     const std::vector<std::array<std::size_t, 8>>& gwr_bins,
                     const std::vector<std::array<std::size_t, 8>>& mgwr_bins)
{
    CsvWriter w;
    w.cell("r2_range");
    for (const auto& label : labels) {
        w.cell(label + "_gwr").cell(label + "_mgwr");
    }
    w.endrow();
    auto bin_labels = local_r2_bin_labels();
    for (std::size_t b = 0; b < bin_labels.size(); ++b) {
        w.cell(bin_labels[b]);
        for (std::size_t c = 0; c < labels.size(); ++c)
            w.cell((long long)gwr_bins[c][b]).cell((long long)mgwr_bins[c][b]);
        w.endrow();
    }
    return w.str();
}

std::string selection_steps_csv(const std::vector<std::pair<std::string, SelectionResult>>& results)
{
    CsvWriter w;
    w.cell("group").cell("step").cell("entered").cell("p_value").cell("adj_r2").cell("max_vif").endrow();
    for (const auto& [group, result] : results) {
        for (std::size_t s = 0; s < result.step_log.size(); ++s) {
            const StepInfo& info = result.step_log[s];
            w.cell(group)
                .cell((long long)(s + 1))
                .cell(info.entered)
                .cell(info.p_value)
                .cell(info.adj_r2)
                .cell(info.max_vif)
                .endrow();
        }
    }
    return w.str();
}

std::string rejected_csv(const std::vector<std::pair<std::string, SelectionResult>>& results)
{
    CsvWriter w;
    w.cell("group").cell("column").cell("reason").endrow();
    for (const auto& [group, result] : results)
        for (const auto& [column, reason] : result.rejected)
            w.cell(group).cell(column).cell(to_string(reason)).endrow();
    return w.str();
}

std::string confirm_csv(const std::vector<ColumnCheck>& checks)
{
    CsvWriter w;
    w.cell("column").cell("vif").cell("t_statistic").cell("probability").endrow();
    for (const auto& c : checks)
        w.cell(c.name).cell(c.vif).cell(c.t).cell(c.p).endrow();
    return w.str();
}

std::string join_report_csv(const JoinReport& report)
{
    CsvWriter w;
    w.cell("status").cell("fips").endrow();
    w.cell("matched").cell((long long)report.matched).endrow();
    for (const auto& f : report.unmatched_geometry)
        w.cell("geometry_without_attributes").cell(f.value()).endrow();
    for (const auto& f : report.unmatched_attributes)
        w.cell("attributes_without_geometry").cell(f.value()).endrow();
    return w.str();
}

std::string weights_summary_csv(const WeightMatrix& w_matrix)
{
    CsvWriter w;
    w.cell("property").cell("value").endrow();
    w.cell("n").cell((long long)w_matrix.n).endrow();
    w.cell("kind").cell(to_string(w_matrix.kind)).endrow();
    if (w_matrix.metric)
        w.cell("metric").cell(to_string(*w_matrix.metric)).endrow();
    w.cell("row_standardized").cell(w_matrix.row_standardized ? "true" : "false").endrow();
    std::size_t links = 0;
    for (std::size_t i = 0; i < w_matrix.n; ++i)
        links += w_matrix.degree(i);
    w.cell("links").cell((long long)links).endrow();
    auto islands = w_matrix.islands();
    w.cell("islands").cell((long long)islands.size()).endrow();
    for (auto i : islands)
        w.cell("island_row").cell((long long)i).endrow();
    return w.str();
}

std::string importance_csv(const ImportanceReport& report)
{
    CsvWriter w;
    w.cell("variable").cell("relative_importance_pct").cell("normalized_importance").endrow();
    for (std::size_t j = 0; j < report.names.size(); ++j)
        w.cell(report.names[j])
            .cell(report.relative_importance(j))
            .cell(report.normalized_importance(j))
            .endrow();
    return w.str();
}

// ---------------------------------------------------------------------------
// commands

CommandResult run_ingest(const RunConfig& cfg)
{
    LoadedInputs in = load_inputs(cfg, false, false);
    OutputCollector out(cfg);
    out.add("joined.geojson", to_geojson(in.ds));
    out.add("join_report.csv", join_report_csv(in.join_report));
    std::vector<std::string> warnings;
    if (!in.join_report.unmatched_geometry.empty() || !in.join_report.unmatched_attributes.empty())
        warnings.push_back("join: " + std::to_string(in.join_report.unmatched_geometry.size()) +
                           " geometry rows and " +
                           std::to_string(in.join_report.unmatched_attributes.size()) +
                           " attribute rows unmatched");
    return out.flush("ingest", std::move(warnings));
}

CommandResult run_weights(const RunConfig& cfg)
{
    LoadedInputs in = load_inputs(cfg, false, false);
    ExecSpec exec = make_exec(cfg);
    WeightMatrix w = build_weights(cfg, in.ds, exec);
    if (cfg.weights_standardize)
        w = row_standardize(w);
    OutputCollector out(cfg);
    out.add("weights.gal", to_gal(w));
    out.add("weights_summary.csv", weights_summary_csv(w));
    std::vector<std::string> warnings;
    if (!w.islands().empty())
        warnings.push_back("weights: " + std::to_string(w.islands().size()) + " islands (zero rows kept)");
    return out.flush("weights", std::move(warnings));
}

std::string response_label(const RunConfig& cfg)
{
    switch (cfg.response_source) {
    case ResponseSource::Cases: return "cases";
    case ResponseSource::Deaths: return "deaths";
    case ResponseSource::Column: return cfg.response_column;
    }
    return "response";
}

CommandResult run_model1(const RunConfig& cfg)
{
    bool needs_daily = cfg.response_source != ResponseSource::Column;
    LoadedInputs in = load_inputs(cfg, needs_daily && cfg.response_source == ResponseSource::Cases,
                                  needs_daily && cfg.response_source == ResponseSource::Deaths);
    ExecSpec exec = make_exec(cfg);

    ResponseBuild response = build_response(cfg, in);
    std::vector<std::string> warnings = response.warnings;

    ModelFrame frame = build_frame(in.ds, cfg.covariates, response.values);
    if (frame.dropped > 0)
        warnings.push_back("frame: dropped " + std::to_string(frame.dropped) +
                           " rows with missing values");

    WeightMatrix w = row_standardize(build_weights(cfg, frame.ds, exec));
    WeightEigen eigen = weight_eigenvalues(w);

    GlobalFit ols = fit_ols(frame.design, frame.y);
    DependenceDiagnostics diag = dependence_diagnostics(ols, frame.design, frame.y, w);
    bool indicated = diag.lm_lag.probability < 0.05 || diag.lm_error.probability < 0.05;

    std::optional<GlobalFit> slm, sem;
    if (indicated) {
        slm = fit_slm(frame.design, frame.y, w, &eigen);
        sem = fit_sem(frame.design, frame.y, w, &eigen);
    } else {
        warnings.push_back("model1: LM tests not significant at 0.05; SLM/SEM not indicated");
    }

    OutputCollector out(cfg);
    out.add("global_fits.csv", global_fits_csv(response_label(cfg), ols, slm ? &*slm : nullptr,
                                               sem ? &*sem : nullptr));
    out.add("diagnostics.csv", diagnostics_csv(diag, indicated));
    return out.flush("model1", std::move(warnings));
}

struct LocalPair {
    GwrFit gwr;
    MgwrFit mgwr;
};

LocalPair fit_local_pair(const RunConfig& cfg, const ModelFrame& frame, const ExecSpec& exec,
                         const std::optional<std::vector<int>>& pinned = std::nullopt,
                         std::optional<int> pinned_gwr = std::nullopt)
{
    std::vector<LonLat> coords = frame.ds.centroids();
    GwrOptions gwr_opts;
    gwr_opts.metric = cfg.local_metric;
    gwr_opts.exec = exec;
    gwr_opts.bandwidth = pinned_gwr ? pinned_gwr : cfg.bandwidth;

    MgwrOptions mgwr_opts;
    mgwr_opts.metric = cfg.local_metric;
    mgwr_opts.exec = exec;
    mgwr_opts.compute_bandwidth_intervals = cfg.bandwidth_intervals;
    mgwr_opts.fixed_bandwidths = pinned;

    LocalPair pair{fit_gwr(frame.design, frame.y, coords, gwr_opts),
                   fit_mgwr(frame.design, frame.y, coords, mgwr_opts)};
    return pair;
}

std::string bandwidths_csv(const DesignMatrix& X, const GwrFit& gwr, const MgwrFit& mgwr)
{
    CsvWriter w;
    w.cell("term").cell("gwr_bandwidth").cell("mgwr_bandwidth").cell("mgwr_interval_low")
        .cell("mgwr_interval_high").endrow();
    std::vector<std::string> terms;
    terms.push_back("CONSTANT");
    terms.insert(terms.end(), X.names.begin(), X.names.end());
    for (std::size_t j = 0; j < terms.size(); ++j) {
        w.cell(terms[j]).cell((long long)gwr.bandwidth).cell((long long)mgwr.covariate_bandwidths[j]);
        if (mgwr.bandwidth_intervals) {
            w.cell((long long)(*mgwr.bandwidth_intervals)[j].first)
                .cell((long long)(*mgwr.bandwidth_intervals)[j].second);
        } else {
            w.cell(kNA).cell(kNA);
        }
        w.endrow();
    }
    return w.str();
}

CommandResult run_model2(const RunConfig& cfg)
{
    bool needs_daily = cfg.response_source != ResponseSource::Column;
    LoadedInputs in = load_inputs(cfg, needs_daily && cfg.response_source == ResponseSource::Cases,
                                  needs_daily && cfg.response_source == ResponseSource::Deaths);
    ExecSpec exec = make_exec(cfg);

    ResponseBuild response = build_response(cfg, in);
    std::vector<std::string> warnings = response.warnings;
    ModelFrame frame = build_frame(in.ds, cfg.covariates, response.values);
    if (frame.dropped > 0)
        warnings.push_back("frame: dropped " + std::to_string(frame.dropped) +
                           " rows with missing values");

    LocalPair pair = fit_local_pair(cfg, frame, exec);
    if (!pair.mgwr.converged)
        warnings.push_back("mgwr: backfitting did not converge within the iteration limit");

    LocalCollinearity collinearity = local_collinearity(
        frame.design, frame.ds.centroids(), KernelSpec{pair.gwr.bandwidth}, exec);
    if (!collinearity.degenerate_locations.empty())
        warnings.push_back("collinearity: " + std::to_string(collinearity.degenerate_locations.size()) +
                           " locations with zero weighted variance in a column");

    OutputCollector out(cfg);
    out.add("local_summary.csv",
            local_summary_csv({"all_variables"}, {&pair.gwr}, {&pair.mgwr}));
    out.add("local_surfaces.csv",
            local_surfaces_csv(frame.ds, frame.design, pair.gwr, pair.mgwr, &collinearity));
    out.add("local_surfaces.geojson",
            local_surfaces_geojson(frame.ds, frame.design, pair.gwr, pair.mgwr));
    out.add("bandwidths.csv", bandwidths_csv(frame.design, pair.gwr, pair.mgwr));
    out.add("local_collinearity.csv", local_collinearity_csv(frame.ds, frame.design, collinearity));
    out.add("local_r2_bins.csv", bins_csv({"all"}, {bin_local_r2(pair.gwr.local_r2)},
                                          {bin_local_r2(pair.mgwr.local_r2)}));
    return out.flush("model2", std::move(warnings));
}

CommandResult run_model3(const RunConfig& cfg)
{
    if (cfg.groups.empty())
        throw ConfigError("covariates.group.*: model3 needs at least one group");
    bool needs_daily = cfg.response_source != ResponseSource::Column;
    LoadedInputs in = load_inputs(cfg, needs_daily && cfg.response_source == ResponseSource::Cases,
                                  needs_daily && cfg.response_source == ResponseSource::Deaths);
    ExecSpec exec = make_exec(cfg);

    ResponseBuild response = build_response(cfg, in);
    std::vector<std::string> warnings = response.warnings;

    std::vector<std::pair<std::string, SelectionResult>> selections;
    std::vector<std::string> labels;
    std::vector<GwrFit> gwr_fits;
    std::vector<MgwrFit> mgwr_fits;
    std::vector<const GwrFit*> gwr_ptrs;
    std::vector<const MgwrFit*> mgwr_ptrs;

    for (const auto& [group, columns] : cfg.groups) {
        ModelFrame candidate_frame = build_frame(in.ds, columns, response.values);
        SelectionResult selection =
            stepwise_forward(candidate_frame.design, candidate_frame.y, cfg.p_enter, cfg.vif_cap, exec);
        selections.emplace_back(group, selection);
        labels.push_back(group);
        if (selection.selected.empty()) {
            warnings.push_back("model3: group '" + group + "' selected no variables");
            gwr_ptrs.push_back(nullptr);
            mgwr_ptrs.push_back(nullptr);
            continue;
        }
        ModelFrame frame = build_frame(in.ds, selection.selected, response.values);
        LocalPair pair = fit_local_pair(cfg, frame, exec);
        if (!pair.mgwr.converged)
            warnings.push_back("mgwr: group '" + group + "' did not converge");
        gwr_fits.push_back(std::move(pair.gwr));
        mgwr_fits.push_back(std::move(pair.mgwr));
        gwr_ptrs.push_back(&gwr_fits.back());
        mgwr_ptrs.push_back(&mgwr_fits.back());
    }

    OutputCollector out(cfg);
    out.add("selection_steps.csv", selection_steps_csv(selections));
    out.add("selection_rejected.csv", rejected_csv(selections));
    out.add("group_summary.csv", local_summary_csv(labels, gwr_ptrs, mgwr_ptrs));
    return out.flush("model3", std::move(warnings));
}

CommandResult run_model4(const RunConfig& cfg)
{
    if (cfg.months.empty())
        throw ConfigError("response.months: model4 needs at least one month");
    if (cfg.response_source == ResponseSource::Column)
        throw ConfigError("response.variable: model4 needs a daily series response (cases or deaths)");
    if (cfg.aggregation != Aggregation::Monthly)
        throw ConfigError("response.aggregation: model4 requires monthly");

    LoadedInputs in = load_inputs(cfg, cfg.response_source == ResponseSource::Cases,
                                  cfg.response_source == ResponseSource::Deaths);
    ExecSpec exec = make_exec(cfg);

    std::vector<std::string> warnings;
    std::vector<std::string> labels;
    std::vector<GwrFit> gwr_fits;
    std::vector<MgwrFit> mgwr_fits;
    std::vector<std::array<std::size_t, 8>> gwr_bins, mgwr_bins;

    OutputCollector out(cfg);
    std::optional<std::vector<int>> pinned;
    std::optional<int> pinned_gwr;
    for (const YearMonth& month : cfg.months) {
        ResponseBuild response = build_response(cfg, in, month);
        for (auto& warning : response.warnings)
            warnings.push_back(month.label() + ": " + warning);
        ModelFrame frame = build_frame(in.ds, cfg.covariates, response.values);
        if (frame.dropped > 0)
            warnings.push_back(month.label() + ": dropped " + std::to_string(frame.dropped) +
                               " rows with missing values");

        LocalPair pair = fit_local_pair(cfg, frame, exec, pinned, pinned_gwr);
        if (!pair.mgwr.converged)
            warnings.push_back(month.label() + ": mgwr did not converge");
        if (cfg.pin_bandwidths && !pinned) {
            pinned = pair.mgwr.covariate_bandwidths;
            pinned_gwr = pair.gwr.bandwidth;
        }

        out.add("local_surfaces_" + month.label() + ".csv",
                local_surfaces_csv(frame.ds, frame.design, pair.gwr, pair.mgwr, nullptr));
        labels.push_back(month.label());
        gwr_bins.push_back(bin_local_r2(pair.gwr.local_r2));
        mgwr_bins.push_back(bin_local_r2(pair.mgwr.local_r2));
        gwr_fits.push_back(std::move(pair.gwr));
        mgwr_fits.push_back(std::move(pair.mgwr));
    }

    std::vector<const GwrFit*> gwr_ptrs;
    std::vector<const MgwrFit*> mgwr_ptrs;
    for (std::size_t i = 0; i < gwr_fits.size(); ++i) {
        gwr_ptrs.push_back(&gwr_fits[i]);
        mgwr_ptrs.push_back(&mgwr_fits[i]);
    }
    out.add("month_summary.csv", local_summary_csv(labels, gwr_ptrs, mgwr_ptrs));
    out.add("local_r2_bins.csv", bins_csv(labels, gwr_bins, mgwr_bins));
    return out.flush("model4", std::move(warnings));
}

CommandResult run_select(const RunConfig& cfg)
{
    bool needs_daily = cfg.response_source != ResponseSource::Column;
    LoadedInputs in = load_inputs(cfg, needs_daily && cfg.response_source == ResponseSource::Cases,
                                  needs_daily && cfg.response_source == ResponseSource::Deaths);
    ExecSpec exec = make_exec(cfg);

    ResponseBuild response = build_response(cfg, in);
    std::vector<std::string> warnings = response.warnings;
    ModelFrame frame = build_frame(in.ds, cfg.covariates, response.values);
    if (frame.dropped > 0)
        warnings.push_back("frame: dropped " + std::to_string(frame.dropped) +
                           " rows with missing values");

    SelectionResult selection = stepwise_forward(frame.design, frame.y, cfg.p_enter, cfg.vif_cap, exec);
    std::vector<std::pair<std::string, SelectionResult>> wrapped{{"all", selection}};

    OutputCollector out(cfg);
    out.add("selection_steps.csv", selection_steps_csv(wrapped));
    out.add("selection_rejected.csv", rejected_csv(wrapped));
    if (!selection.selected.empty()) {
        DesignMatrix chosen = frame.design.with_columns(selection.selected);
        out.add("selection_confirm.csv", confirm_csv(confirm_enter(chosen, frame.y)));
    } else {
        warnings.push_back("select: no candidate qualified");
    }
    return out.flush("select", std::move(warnings));
}

CommandResult run_importance(const RunConfig& cfg)
{
    bool needs_daily = cfg.response_source != ResponseSource::Column;
    LoadedInputs in = load_inputs(cfg, needs_daily && cfg.response_source == ResponseSource::Cases,
                                  needs_daily && cfg.response_source == ResponseSource::Deaths);
    ExecSpec exec = make_exec(cfg);

    ResponseBuild response = build_response(cfg, in);
    std::vector<std::string> warnings = response.warnings;
    ModelFrame frame = build_frame(in.ds, cfg.covariates, response.values);
    if (frame.dropped > 0)
        warnings.push_back("frame: dropped " + std::to_string(frame.dropped) +
                           " rows with missing values");

    ForestConfig forest_cfg;
    forest_cfg.n_trees = cfg.forest_trees;
    forest_cfg.max_features = cfg.forest_max_features;
    forest_cfg.min_leaf = cfg.forest_min_leaf;
    forest_cfg.seed = cfg.seed;
    RandomForest forest = fit_forest(frame.design, frame.y, forest_cfg, exec);
    ImportanceReport report = relative_importance(forest);

    OutputCollector out(cfg);
    out.add("importance.csv", importance_csv(report));
    return out.flush("importance", std::move(warnings));
}

} // namespace

CommandResult run_command(const std::string& command, const RunConfig& cfg)
{
    if (!cfg.model.empty() && cfg.model != command)
        throw ConfigError("run.model: config names '" + cfg.model + "' but the command is '" +
                          command + "'");
    if (command == "ingest")
        return run_ingest(cfg);
    if (command == "weights")
        return run_weights(cfg);
    if (command == "model1")
        return run_model1(cfg);
    if (command == "model2")
        return run_model2(cfg);
    if (command == "model3")
        return run_model3(cfg);
    if (command == "model4")
        return run_model4(cfg);
    if (command == "select")
        return run_select(cfg);
    if (command == "importance")
        return run_importance(cfg);
    throw ConfigError("unknown command '" + command + "'");
}

bool verify_manifest(const std::string& manifest_path, std::ostream& out)
{
    json manifest = json::parse(read_file(manifest_path));
    fs::path dir = fs::path(manifest_path).parent_path();
    out << "command: " << manifest.value("command", "?") << '\n';
    out << "artifact_version: " << manifest.value("artifact_version", "?") << '\n';
    out << "config_hash: " << manifest.value("config_hash", "?") << '\n';
    out << "seed: " << manifest.value("seed", std::uint64_t(0)) << '\n';
    bool ok = true;
    for (const auto& entry : manifest.at("outputs")) {
        std::string rel = entry.at("path").get<std::string>();
        fs::path target = dir / rel;
        std::string status;
        if (!fs::exists(target)) {
            status = "MISSING";
            ok = false;
        } else {
            std::string content = read_file(target.string());
            status = hex64(fnv1a64(content)) == entry.at("fnv1a64").get<std::string>() ? "ok"
                                                                                       : "CHANGED";
            if (status == "CHANGED")
                ok = false;
        }
        out << rel << ": " << status << '\n';
    }
    const auto& warnings = manifest.at("warnings");
    for (const auto& warning : warnings)
        out << "warning: " << warning.get<std::string>() << '\n';
    return ok;
}

} // namespace spatecon
