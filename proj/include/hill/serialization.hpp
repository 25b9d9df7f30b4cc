#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hill/error.hpp"
#include "hill/floquet.hpp"
#include "hill/lemma_constants.hpp"
#include "hill/limitperiodic.hpp"
#include "hill/potential.hpp"
#include "hill/thinspec.hpp"

namespace hill {

using json = nlohmann::json;

// ---------------------------------------------------------------- potentials

inline json to_json(const Potential& V);

inline json layout_to_json(const BlockLayout& L) {
    return json{{"block_period", L.block_period},
                {"repeats", L.repeats},
                {"connector_width", L.connector_width},
                {"anchors", L.anchors},
                {"total_period", L.total_period}};
}

inline json to_json(const Potential& V) {
    json j;
    const double P = V.natural_period();
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, detail::CosineSeries>) {
                j = {{"kind", "cosine_series"}, {"period", P}, {"coeffs", p.cos_coeffs}, {"mean", p.mean}};
                if (!p.sin_coeffs.empty()) j["sin_coeffs"] = p.sin_coeffs;
            } else if constexpr (std::is_same_v<T, detail::SampledCurve>) {
                j = {{"kind", "samples"}, {"period", P}, {"xs", p.xs}, {"vs", p.vs}};
            } else if constexpr (std::is_same_v<T, detail::ConstantValue>) {
                j = {{"kind", "constant"}, {"value", p.value}, {"period", P}};
            } else if constexpr (std::is_same_v<T, detail::Concatenation>) {
                json blocks = json::array();
                for (const auto& b : p.layout.blocks) blocks.push_back(to_json(b));
                j = {{"kind", "concatenation"},
                     {"period", P},
                     {"layout", layout_to_json(p.layout)},
                     {"blocks", blocks},
                     {"base", to_json(p.base[0])}};
            } else {
                json terms = json::array();
                for (const auto& t : p.terms) terms.push_back(to_json(t));
                j = {{"kind", "sum"}, {"period", P}, {"terms", terms}};
            }
        },
        V.node().payload);
    if (V.repeat() != 1) j["repeat"] = V.repeat();
    return j;
}

namespace detail {

template <class T>
T required(const json& j, const char* key, const char* kind) {
    if (!j.contains(key))
        throw InvalidArgument("potential", std::string("JSON ") + kind + " potential lacks \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidArgument("potential", std::string("JSON field \"") + key + "\": " + e.what());
    }
}

} // namespace detail

inline Potential potential_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw InvalidArgument("potential", "JSON potential needs a \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    Potential V;
    if (kind == "cosine_series") {
        V = Potential::cosine_series(detail::required<double>(j, "period", "cosine_series"),
                                     detail::required<std::vector<double>>(j, "coeffs", "cosine_series"),
                                     j.value("mean", 0.0), j.value("sin_coeffs", std::vector<double>{}));
    } else if (kind == "constant") {
        V = Potential::constant(detail::required<double>(j, "value", "constant"), j.value("period", 1.0));
    } else if (kind == "samples") {
        V = Potential::samples(detail::required<double>(j, "period", "samples"),
                               detail::required<std::vector<double>>(j, "xs", "samples"),
                               detail::required<std::vector<double>>(j, "vs", "samples"));
    } else if (kind == "sum") {
        std::vector<Potential> terms;
        for (const auto& t : detail::required<json>(j, "terms", "sum")) terms.push_back(potential_from_json(t));
        V = Potential::sum(std::move(terms), detail::required<double>(j, "period", "sum"));
    } else if (kind == "concatenation") {
        json lj = detail::required<json>(j, "layout", "concatenation");
        BlockLayout L;
        L.block_period = detail::required<double>(lj, "block_period", "layout");
        L.repeats = detail::required<int>(lj, "repeats", "layout");
        L.connector_width = lj.value("connector_width", L.block_period);
        L.anchors = detail::required<std::vector<double>>(lj, "anchors", "layout");
        L.total_period = detail::required<double>(lj, "total_period", "layout");
        for (const auto& b : detail::required<json>(j, "blocks", "concatenation"))
            L.blocks.push_back(potential_from_json(b));
        detail::validate_layout(L);
        Potential base = j.contains("base") ? potential_from_json(j.at("base")) : L.blocks.front();
        V = detail::make_concatenation(std::move(L), std::move(base));
    } else {
        throw InvalidArgument("potential", "unknown potential kind \"" + kind + "\"");
    }
    int m = j.value("repeat", 1);
    return m == 1 ? V : V.with_repeat(m);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("io", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("io", path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("io", "cannot write " + path);
    out << text;
    if (!out) throw InvalidArgument("io", "write failed for " + path);
}

inline Potential load_potential(const std::string& path) { return potential_from_json(read_json_file(path)); }

// ---------------------------------------------------------------- reports

inline json to_json(const Band& b) {
    json j{{"index", b.index}, {"lo", b.lo}, {"hi", b.hi}, {"length", b.length()},
           {"lo_kind", to_string(b.lo_kind)}, {"hi_kind", to_string(b.hi_kind)},
           {"lo_degenerate", b.lo_degenerate}, {"hi_degenerate", b.hi_degenerate}};
    if (b.slope_length >= 0.0) j["measured_by_slope"] = true;
    return j;
}

inline json to_json(const BandStructure& s) {
    json bands = json::array();
    for (const auto& b : s.bands) bands.push_back(to_json(b));
    return json{{"R", s.R}, {"scan_lo", s.scan_lo}, {"bound", s.bound}, {"measure", s.measure()}, {"bands", bands}};
}

inline json to_json(const PropagationSettings& p) {
    return json{{"rel_tol", p.rel_tol}, {"abs_tol", p.abs_tol}, {"max_step", p.max_step},
                {"det_tol", p.det_tol}, {"max_steps", p.max_steps}};
}

inline json to_json(const BandSettings& b) {
    return json{{"edge_tol", b.edge_tol},
                {"tangency_tol", b.tangency_tol},
                {"points_per_bound", b.points_per_bound},
                {"min_points", b.min_points},
                {"bisection_iterations", b.bisection_iterations},
                {"golden_iterations", b.golden_iterations},
                {"max_refinements", b.max_refinements},
                {"thin_width", b.thin_width},
                {"propagation", to_json(b.propagation)}};
}

inline json to_json(const QuadratureSettings& q) {
    return json{{"nq", q.nq}, {"rel_change", q.rel_change}, {"max_nq", q.max_nq}, {"margin", q.margin},
                {"propagation", to_json(q.propagation)}};
}

inline json to_json(const ThinSpecSettings& t) {
    return json{{"seed", t.seed},
                {"spacing_lambda_points", t.spacing_lambda_points},
                {"max_Nprime", t.max_Nprime},
                {"gap_min", t.gap_min},
                {"max_tries", t.max_tries},
                {"max_family", t.max_family},
                {"max_segments", t.max_segments},
                {"max_lambda_steps", t.max_lambda_steps},
                {"cover_grid", t.cover_grid},
                {"eta_E_points", t.eta_E_points},
                {"eta_lambda_points", t.eta_lambda_points},
                {"eta_safety", t.eta_safety},
                {"max_total_period", t.max_total_period},
                {"bands", to_json(t.bands)}};
}

inline json to_json(const LemmaConstants& k) {
    return json{{"Q", k.Q}, {"R", k.R}, {"C1", k.C1}, {"C0", k.C0}};
}

inline json to_json(const LyapunovFloor& f) {
    return json{{"eta", f.eta}, {"grid_min", f.grid_min}, {"argmin_E", f.argmin_E},
                {"argmin_lambda", f.argmin_lambda}, {"E_points", f.E_points},
                {"lambda_points", f.lambda_points}, {"safety", f.safety}};
}

inline json to_json(const ThinSpecCover& c) {
    json segs = json::array();
    for (const auto& s : c.segments)
        segs.push_back({{"lambda_lo", s.lambda_lo}, {"lambda_hi", s.lambda_hi}, {"lambda0", s.family.lambda0},
                        {"min_gap", s.min_gap}, {"perturbation", s.perturbation}, {"gamma", s.family.gamma},
                        {"gamma0", s.family.gamma0}, {"k", s.family.k}, {"margin", s.family.margin},
                        {"family_size", s.family.members.size()}, {"lambda_steps", s.lambda_steps}});
    return json{{"epsilon", c.epsilon}, {"R", c.R}, {"Lambda", c.Lambda}, {"Nprime", c.Nprime},
                {"Tprime", c.Tprime}, {"max_spacing", c.max_spacing}, {"ell", c.ell()},
                {"gamma", c.gamma}, {"gamma0", c.gamma0}, {"k", c.k}, {"eta", to_json(c.floor)},
                {"minimal_N", c.minimal_N()}, {"seed", c.seed}, {"segments", segs}};
}

inline json to_json(const ThinSpecPlan& p, bool with_potential = false) {
    json j{{"cover", to_json(p.cover)}, {"N", p.N}, {"Ntilde", p.Ntilde},
           {"total_period", p.total_period()}, {"anchors", p.layout.anchors},
           {"repeats", p.layout.repeats}};
    if (with_potential) j["potential"] = to_json(p.result);
    return j;
}

inline json to_json(const ThinSpecReport& r) {
    return json{{"lambdas", r.lambdas}, {"measures", r.measures}, {"max_measure", r.max_measure},
                {"argmax_lambda", r.argmax_lambda}, {"target", r.target}, {"bound_rhs", r.bound_rhs},
                {"C", r.C}, {"total_period", r.total_period}};
}

inline json to_json(const Hd0Schedule& s) {
    json levels = json::array();
    for (const auto& l : s.levels)
        levels.push_back({{"n", l.n}, {"T", l.T}, {"N", l.N}, {"epsilon", l.epsilon}, {"delta", l.delta},
                          {"Lambda", l.Lambda}, {"r", l.r}, {"lambdas", l.lambdas}, {"measures", l.measures},
                          {"Nprime", l.Nprime}, {"ell", l.ell}, {"eta", l.eta}, {"potential", to_json(l.V)}});
    return json{{"V0", to_json(s.V0)}, {"epsilon0", s.epsilon0}, {"complete", s.complete},
                {"stop_reason", s.stop_reason}, {"pending_epsilon", s.pending_epsilon}, {"levels", levels}};
}

inline Hd0Schedule schedule_from_json(const json& j) {
    Hd0Schedule s;
    try {
        s.V0 = potential_from_json(j.at("V0"));
        s.epsilon0 = j.at("epsilon0").get<double>();
        s.complete = j.value("complete", false);
        s.stop_reason = j.value("stop_reason", std::string{});
        s.pending_epsilon = j.value("pending_epsilon", 0.0);
        for (const auto& lj : j.at("levels")) {
            Hd0Level l;
            l.n = lj.at("n").get<int>();
            l.T = lj.at("T").get<double>();
            l.N = lj.at("N").get<long long>();
            l.epsilon = lj.at("epsilon").get<double>();
            l.delta = lj.at("delta").get<double>();
            l.Lambda = lj.at("Lambda").get<double>();
            l.r = lj.at("r").get<double>();
            l.lambdas = lj.value("lambdas", std::vector<double>{});
            l.measures = lj.value("measures", std::vector<double>{});
            l.Nprime = lj.value("Nprime", 0);
            l.ell = lj.value("ell", std::size_t{0});
            l.eta = lj.value("eta", 0.0);
            l.V = potential_from_json(lj.at("potential"));
            s.levels.push_back(std::move(l));
        }
    } catch (const json::exception& e) {
        throw InvalidArgument("limitperiodic", std::string("malformed schedule JSON: ") + e.what());
    }
    return s;
}

inline json to_json(const CoverSum& c) {
    json iv = json::array();
    for (const auto& [lo, hi] : c.intervals) iv.push_back({lo, hi});
    return json{{"alpha", c.alpha}, {"r", c.r}, {"delta", c.delta}, {"sum", c.sum},
                {"comparison_bound", c.comparison_bound}, {"intervals", iv}};
}

inline json to_json(const GordonReport& g) {
    return json{{"test_period", g.test_period}, {"defect", g.defect}, {"bound", g.bound},
                {"ratio", g.bound > 0.0 ? json(g.ratio) : json(nullptr)}, {"points", g.points}};
}

} // namespace hill
