// Copyright 2026 The dispflow Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dispflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "dispflow/error.hpp"

namespace dispflow {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt(double v) {
    if (v == std::numbers::pi) return "pi";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw InvalidArgument("'" + key + "' expects an integer, got '" + v + "'");
    return out;
}

Axis parse_axis(const std::string& key, const std::string& v) {
    const std::string l = lower(v);
    if (l == "x1" || l == "1") return Axis::X1;
    if (l == "x2" || l == "2") return Axis::X2;
    throw InvalidArgument("'" + key + "' expects x1 or x2");
}

const char* axis_name(Axis a) { return a == Axis::X1 ? "x1" : "x2"; }

ExperimentKind parse_kind(const std::string& v) {
    const std::string l = lower(v);
    if (l == "tomography") return ExperimentKind::Tomography;
    if (l == "strip") return ExperimentKind::Strip;
    if (l == "interface") return ExperimentKind::Interface;
    if (l == "jitter") return ExperimentKind::Jitter;
    throw InvalidArgument("unknown experiment kind '" + v + "'");
}

const std::vector<std::string>& allowed_corrections(ExperimentKind kind) {
    static const std::vector<std::string> tomo = {"none", "flow", "varsolve", "assign"};
    static const std::vector<std::string> jitter = {"none", "discrete", "flow"};
    static const std::vector<std::string> none;
    switch (kind) {
        case ExperimentKind::Tomography: return tomo;
        case ExperimentKind::Jitter: return jitter;
        default: return none;
    }
}

const std::vector<std::string> kMetricNames = {"rmse", "psnr", "rel_l2", "fwhm", "interface_variance"};

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += f(v[i]);
    }
    return out;
}

}  // namespace

double parse_number(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw InvalidArgument("empty numeric value");
    double acc = 1.0;
    char op = '*';
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find_first_of("*/", pos);
        const std::string tok = trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        double v = 0.0;
        if (lower(tok) == "pi") {
            v = std::numbers::pi;
        } else {
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
                throw InvalidArgument("malformed numeric value '" + text + "'");
        }
        if (op == '*') {
            acc *= v;
        } else {
            if (v == 0.0) throw InvalidArgument("division by zero in '" + text + "'");
            acc /= v;
        }
        if (next == std::string::npos) break;
        op = s[next];
        pos = next + 1;
    }
    if (!std::isfinite(acc)) throw InvalidArgument("non-finite numeric value '" + text + "'");
    return acc;
}

ConfigMap parse_config_text(std::istream& is) {
    ConfigMap out;
    std::string section = "experiment";
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw InvalidArgument("line " + std::to_string(lineno) + ": malformed section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidArgument("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = lower(trim(line.substr(0, eq)));
        if (key.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": empty key");
        out[section + "." + key] = trim(line.substr(eq + 1));
    }
    return out;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open config '" + path.string() + "'");
    return parse_config_text(is);
}

std::vector<std::string> pipeline_stages(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Tomography: return {"phantom", "sinogram", "correct", "fbp", "metrics"};
        case ExperimentKind::Jitter: return {"pattern", "jitter", "correct", "metrics"};
        case ExperimentKind::Strip:
        case ExperimentKind::Interface: return {"pattern", "flow", "metrics"};
    }
    return {};
}

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Tomography: return "tomography";
        case ExperimentKind::Strip: return "strip";
        case ExperimentKind::Interface: return "interface";
        case ExperimentKind::Jitter: return "jitter";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    const auto canonical = pipeline_stages(kind);
    if (stages.size() > canonical.size() || !std::equal(stages.begin(), stages.end(), canonical.begin())) {
        std::string list;
        for (const auto& s : canonical) list += (list.empty() ? "" : ", ") + s;
        throw InvalidArgument("stages must be a prefix of: " + list);
    }
    const auto& allowed = allowed_corrections(kind);
    for (const auto& c : corrections)
        if (std::find(allowed.begin(), allowed.end(), c) == allowed.end())
            throw InvalidArgument("correction '" + c + "' is not available for " + to_string(kind) + " experiments");
    for (const auto& m : metrics)
        if (std::find(kMetricNames.begin(), kMetricNames.end(), m) == kMetricNames.end())
            throw InvalidArgument("unknown metric '" + m + "'");

    if (tomo.n < 16) throw InvalidArgument("tomography.n must be >= 16");
    if (tomo.angle_step < 0.0 || tomo.angle_step >= std::numbers::pi)
        throw InvalidArgument("tomography.angle-step must lie in (0, pi)");
    if (tomo.a < 0.0) throw InvalidArgument("tomography.a must be >= 0");
    if (tomo.noise < 0.0) throw InvalidArgument("tomography.noise must be >= 0");

    flow.params.validate();
    if (!(flow.t_end >= 0.0)) throw InvalidArgument("flow.t-end must be >= 0");
    if (flow.beta && !(*flow.beta > 0.0)) throw InvalidArgument("flow.beta must be > 0");
    if (flow.beta_scale && !(*flow.beta_scale > 0.0)) throw InvalidArgument("flow.beta-scale must be > 0");
    if (!(flow.steady_tol > 0.0)) throw InvalidArgument("flow.steady-tol must be > 0");
    for (const FlowCase& c : flow.cases)
        if ((c.k != 1 && c.k != 2) || (c.p != 1 && c.p != 2)) throw InvalidArgument("flow.cases entries must be k:p with k, p in {1, 2}");
    for (double t : flow.t_end_candidates)
        if (!(t > 0.0)) throw InvalidArgument("flow.t-end-candidates must be positive");

    varsolve.params.validate();
    if (varsolve.eps_rel && !(*varsolve.eps_rel > 0.0)) throw InvalidArgument("varsolve.eps-rel must be > 0");
    if (varsolve.iterations < 1) throw InvalidArgument("varsolve.iterations must be >= 1");

    if (discrete.max_shift < 0) throw InvalidArgument("discrete.max-shift must be >= 0");
    if (discrete.k != 1 && discrete.k != 2) throw InvalidArgument("discrete.k must be 1 or 2");

    if (pattern.n1 < 5 || pattern.n2 < 5 || pattern.n < 5) throw InvalidArgument("pattern sizes must be >= 5");
    if (!(pattern.dx1 > 0.0)) throw InvalidArgument("pattern.dx1 must be > 0");
    if (pattern.width < 1 || pattern.width >= pattern.n1) throw InvalidArgument("pattern.width must lie in [1, n1)");
}

ExperimentConfig make_config(const ConfigMap& map) {
    ExperimentConfig c;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    auto real = [](double& dst) -> Setter { return [&dst](const std::string&, const std::string& v) { dst = parse_number(v); }; };
    auto opt_real = [](std::optional<double>& dst) -> Setter {
        return [&dst](const std::string&, const std::string& v) { dst = parse_number(v); };
    };
    auto size = [](std::size_t& dst) -> Setter {
        return [&dst](const std::string& k, const std::string& v) { dst = parse_integer<std::size_t>(k, v); };
    };
    auto integer = [](int& dst) -> Setter {
        return [&dst](const std::string& k, const std::string& v) { dst = parse_integer<int>(k, v); };
    };
    auto seed = [](std::uint64_t& dst) -> Setter {
        return [&dst](const std::string& k, const std::string& v) { dst = parse_integer<std::uint64_t>(k, v); };
    };
    auto list = [](std::vector<std::string>& dst) -> Setter {
        return [&dst](const std::string&, const std::string& v) {
            dst.clear();
            for (auto& s : split_list(v)) dst.push_back(lower(s));
        };
    };
    auto axis = [](Axis& dst) -> Setter { return [&dst](const std::string& k, const std::string& v) { dst = parse_axis(k, v); }; };

    const std::map<std::string, Setter> table = {
        {"experiment.name", [&](const std::string&, const std::string& v) { c.name = v; }},
        {"experiment.kind", [&](const std::string&, const std::string& v) { c.kind = parse_kind(v); }},
        {"experiment.stages", list(c.stages)},
        {"experiment.corrections", list(c.corrections)},
        {"experiment.metrics", list(c.metrics)},
        {"experiment.output", [&](const std::string&, const std::string& v) { c.output_dir = v; }},
        {"experiment.seed", seed(c.seed)},
        {"experiment.validation-seed", seed(c.validation_seed)},

        {"tomography.n", size(c.tomo.n)},
        {"tomography.angle-step", real(c.tomo.angle_step)},
        {"tomography.a", real(c.tomo.a)},
        {"tomography.noise", real(c.tomo.noise)},
        {"tomography.offsets", size(c.tomo.n_offsets)},
        {"tomography.variant",
         [&](const std::string&, const std::string& v) {
             const std::string l = lower(v);
             if (l == "high-contrast") c.tomo.variant = SheppLoganVariant::HighContrast;
             else if (l == "standard") c.tomo.variant = SheppLoganVariant::Standard;
             else throw InvalidArgument("tomography.variant expects standard or high-contrast");
         }},
        {"tomography.filter",
         [&](const std::string&, const std::string& v) {
             const std::string l = lower(v);
             if (l == "ram-lak") c.tomo.filter = FbpFilter::RamLak;
             else if (l == "shepp-logan") c.tomo.filter = FbpFilter::SheppLogan;
             else if (l == "none") c.tomo.filter = FbpFilter::None;
             else throw InvalidArgument("tomography.filter expects ram-lak, shepp-logan or none");
         }},

        {"flow.axis", axis(c.flow.params.axis)},
        {"flow.k", integer(c.flow.params.k)},
        {"flow.p", integer(c.flow.params.p)},
        {"flow.q", integer(c.flow.params.q)},
        {"flow.eps", real(c.flow.params.eps)},
        {"flow.cfl", real(c.flow.params.cfl)},
        {"flow.max-dt", real(c.flow.params.max_dt)},
        {"flow.beta", opt_real(c.flow.beta)},
        {"flow.beta-scale", opt_real(c.flow.beta_scale)},
        {"flow.t-end",
         [&](const std::string&, const std::string& v) {
             if (lower(v) == "steady") {
                 c.flow.to_steady = true;
             } else {
                 c.flow.to_steady = false;
                 c.flow.t_end = parse_number(v);
             }
         }},
        {"flow.steady-tol", real(c.flow.steady_tol)},
        {"flow.max-steps", size(c.flow.max_steps)},
        {"flow.cases",
         [&](const std::string&, const std::string& v) {
             c.flow.cases.clear();
             for (const auto& item : split_list(v)) {
                 const auto colon = item.find(':');
                 if (colon == std::string::npos) throw InvalidArgument("flow.cases entries must look like k:p");
                 c.flow.cases.push_back({parse_integer<int>("flow.cases", trim(item.substr(0, colon))),
                                         parse_integer<int>("flow.cases", trim(item.substr(colon + 1)))});
             }
         }},
        {"flow.t-end-candidates",
         [&](const std::string&, const std::string& v) {
             c.flow.t_end_candidates.clear();
             for (const auto& item : split_list(v)) c.flow.t_end_candidates.push_back(parse_number(item));
         }},

        {"varsolve.axis", axis(c.varsolve.params.axis)},
        {"varsolve.k", integer(c.varsolve.params.k)},
        {"varsolve.p", integer(c.varsolve.params.p)},
        {"varsolve.q", integer(c.varsolve.params.q)},
        {"varsolve.alpha", real(c.varsolve.params.alpha)},
        {"varsolve.eps", real(c.varsolve.params.eps)},
        {"varsolve.eps-rel", opt_real(c.varsolve.eps_rel)},
        {"varsolve.beta", real(c.varsolve.params.beta)},
        {"varsolve.cg-tol", real(c.varsolve.params.cg_tol)},
        {"varsolve.iterations", integer(c.varsolve.iterations)},

        {"discrete.max-shift", integer(c.discrete.max_shift)},
        {"discrete.k", integer(c.discrete.k)},

        {"pattern.n1", size(c.pattern.n1)},
        {"pattern.n2", size(c.pattern.n2)},
        {"pattern.dx1", real(c.pattern.dx1)},
        {"pattern.width", size(c.pattern.width)},
        {"pattern.intensity", real(c.pattern.intensity)},
        {"pattern.n", size(c.pattern.n)},
        {"pattern.amplitude", real(c.pattern.amplitude)},
    };

    for (const auto& [key, value] : map) {
        const auto it = table.find(key);
        if (it == table.end()) throw InvalidArgument("unknown config key '" + key + "'");
        it->second(key, value);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return make_config(load_config_file(path)); }

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream os;
    const std::function<std::string(const std::string&)> id = [](const std::string& s) { return s; };
    os << "[experiment]\n"
       << "name = " << c.name << "\n"
       << "kind = " << to_string(c.kind) << "\n";
    if (!c.stages.empty()) os << "stages = " << join(c.stages, id) << "\n";
    if (!c.corrections.empty()) os << "corrections = " << join(c.corrections, id) << "\n";
    if (!c.metrics.empty()) os << "metrics = " << join(c.metrics, id) << "\n";
    if (!c.output_dir.empty()) os << "output = " << c.output_dir.string() << "\n";
    os << "seed = " << c.seed << "\n"
       << "validation-seed = " << c.validation_seed << "\n\n";

    os << "[tomography]\n"
       << "n = " << c.tomo.n << "\n"
       << "angle-step = " << fmt(c.tomo.angle_step) << "\n"
       << "a = " << fmt(c.tomo.a) << "\n"
       << "noise = " << fmt(c.tomo.noise) << "\n"
       << "offsets = " << c.tomo.n_offsets << "\n"
       << "variant = " << (c.tomo.variant == SheppLoganVariant::HighContrast ? "high-contrast" : "standard") << "\n"
       << "filter = "
       << (c.tomo.filter == FbpFilter::RamLak ? "ram-lak" : c.tomo.filter == FbpFilter::SheppLogan ? "shepp-logan" : "none")
       << "\n\n";

    os << "[flow]\n"
       << "axis = " << axis_name(c.flow.params.axis) << "\n"
       << "k = " << c.flow.params.k << "\n"
       << "p = " << c.flow.params.p << "\n"
       << "q = " << c.flow.params.q << "\n"
       << "eps = " << fmt(c.flow.params.eps) << "\n"
       << "cfl = " << fmt(c.flow.params.cfl) << "\n"
       << "max-dt = " << fmt(c.flow.params.max_dt) << "\n";
    if (c.flow.beta) os << "beta = " << fmt(*c.flow.beta) << "\n";
    if (c.flow.beta_scale) os << "beta-scale = " << fmt(*c.flow.beta_scale) << "\n";
    os << "t-end = " << (c.flow.to_steady ? std::string("steady") : fmt(c.flow.t_end)) << "\n"
       << "steady-tol = " << fmt(c.flow.steady_tol) << "\n"
       << "max-steps = " << c.flow.max_steps << "\n";
    if (!c.flow.cases.empty()) {
        const std::function<std::string(const FlowCase&)> fc = [](const FlowCase& f) {
            return std::to_string(f.k) + ":" + std::to_string(f.p);
        };
        os << "cases = " << join(c.flow.cases, fc) << "\n";
    }
    if (!c.flow.t_end_candidates.empty()) {
        const std::function<std::string(const double&)> fd = [](const double& d) { return fmt(d); };
        os << "t-end-candidates = " << join(c.flow.t_end_candidates, fd) << "\n";
    }

    os << "\n[varsolve]\n"
       << "axis = " << axis_name(c.varsolve.params.axis) << "\n"
       << "k = " << c.varsolve.params.k << "\n"
       << "p = " << c.varsolve.params.p << "\n"
       << "q = " << c.varsolve.params.q << "\n"
       << "alpha = " << fmt(c.varsolve.params.alpha) << "\n"
       << "eps = " << fmt(c.varsolve.params.eps) << "\n";
    if (c.varsolve.eps_rel) os << "eps-rel = " << fmt(*c.varsolve.eps_rel) << "\n";
    os << "beta = " << fmt(c.varsolve.params.beta) << "\n"
       << "cg-tol = " << fmt(c.varsolve.params.cg_tol) << "\n"
       << "iterations = " << c.varsolve.iterations << "\n\n";

    os << "[discrete]\n"
       << "max-shift = " << c.discrete.max_shift << "\n"
       << "k = " << c.discrete.k << "\n\n";

    os << "[pattern]\n"
       << "n1 = " << c.pattern.n1 << "\n"
       << "n2 = " << c.pattern.n2 << "\n"
       << "dx1 = " << fmt(c.pattern.dx1) << "\n"
       << "width = " << c.pattern.width << "\n"
       << "intensity = " << fmt(c.pattern.intensity) << "\n"
       << "n = " << c.pattern.n << "\n"
       << "amplitude = " << fmt(c.pattern.amplitude) << "\n";
    return os.str();
}

}  // namespace dispflow
