#include "dforge/config.hpp"

#include "dforge/errors.hpp"
#include "dforge/hash.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace dforge {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    while (a < s.size() && std::isspace(static_cast<unsigned char>(s[a]))) {
        ++a;
    }
    std::size_t b = s.size();
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) {
        --b;
    }
    return s.substr(a, b - a);
}

// Key dispatch table: section.key -> setter. Keeps parsing total and makes
// the rejection message name the offending key.
using Setter = std::function<void(PipelineConfig&, const std::string&)>;

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return d;
    } catch (const std::exception&) {
        throw ParseError("bad numeric value for " + key + ": " + v);
    }
}

int parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const int i = std::stoi(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return i;
    } catch (const std::exception&) {
        throw ParseError("bad integer value for " + key + ": " + v);
    }
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"general.seed",
         [](PipelineConfig& c, const std::string& v) {
             c.rng_seed = static_cast<std::uint64_t>(std::stoull(v));
         }},
        {"general.threads",
         [](PipelineConfig& c, const std::string& v) { c.threads = parse_int(v, "general.threads"); }},

        {"filter.max_xy_aspect_ratio",
         [](PipelineConfig& c, const std::string& v) {
             c.filter.max_xy_aspect_ratio = parse_double(v, "filter.max_xy_aspect_ratio");
         }},
        {"filter.min_angular_span_deg",
         [](PipelineConfig& c, const std::string& v) {
             c.filter.min_angular_span_deg = parse_double(v, "filter.min_angular_span_deg");
         }},
        {"filter.distance_weight",
         [](PipelineConfig& c, const std::string& v) {
             c.filter.distance_weight = parse_double(v, "filter.distance_weight");
         }},
        {"filter.target_class",
         [](PipelineConfig& c, const std::string& v) {
             c.filter.target_class = distribution_class_from_string(v);
         }},

        {"tsdf.voxel_size",
         [](PipelineConfig& c, const std::string& v) { c.tsdf.voxel_size = parse_double(v, "tsdf.voxel_size"); }},
        {"tsdf.grid_dim",
         [](PipelineConfig& c, const std::string& v) { c.tsdf.grid_dim = parse_int(v, "tsdf.grid_dim"); }},
        {"tsdf.origin_x",
         [](PipelineConfig& c, const std::string& v) { c.tsdf.origin_x = parse_double(v, "tsdf.origin_x"); }},
        {"tsdf.origin_y",
         [](PipelineConfig& c, const std::string& v) { c.tsdf.origin_y = parse_double(v, "tsdf.origin_y"); }},
        {"tsdf.origin_z",
         [](PipelineConfig& c, const std::string& v) { c.tsdf.origin_z = parse_double(v, "tsdf.origin_z"); }},
        {"tsdf.truncation",
         [](PipelineConfig& c, const std::string& v) { c.tsdf.truncation = parse_double(v, "tsdf.truncation"); }},
        {"tsdf.max_weight",
         [](PipelineConfig& c, const std::string& v) { c.tsdf.max_weight = parse_double(v, "tsdf.max_weight"); }},
        {"tsdf.occupancy_band",
         [](PipelineConfig& c, const std::string& v) {
             c.tsdf.occupancy_band = parse_double(v, "tsdf.occupancy_band");
         }},

        {"flow.eps_static",
         [](PipelineConfig& c, const std::string& v) { c.flow.eps_static = parse_double(v, "flow.eps_static"); }},
        {"flow.eps_dyn",
         [](PipelineConfig& c, const std::string& v) { c.flow.eps_dyn = parse_double(v, "flow.eps_dyn"); }},
        {"flow.min_static",
         [](PipelineConfig& c, const std::string& v) {
             c.flow.policy.min_static = parse_double(v, "flow.min_static");
         }},
        {"flow.min_dynamic",
         [](PipelineConfig& c, const std::string& v) {
             c.flow.policy.min_dynamic = parse_double(v, "flow.min_dynamic");
         }},
        {"flow.max_uniformity",
         [](PipelineConfig& c, const std::string& v) {
             c.flow.policy.max_uniformity = parse_double(v, "flow.max_uniformity");
         }},
        {"flow.w_mask",
         [](PipelineConfig& c, const std::string& v) {
             c.flow.ref_weights.w_mask = parse_double(v, "flow.w_mask");
         }},
        {"flow.w_flow",
         [](PipelineConfig& c, const std::string& v) {
             c.flow.ref_weights.w_flow = parse_double(v, "flow.w_flow");
         }},

        {"sampler.train_timesteps",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.train_timesteps = parse_int(v, "sampler.train_timesteps");
         }},
        {"sampler.beta_start",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.beta_start = parse_double(v, "sampler.beta_start");
         }},
        {"sampler.beta_end",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.beta_end = parse_double(v, "sampler.beta_end");
         }},
        {"sampler.spacing",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "linear") {
                 c.sampler.spacing = Spacing::kLinear;
             } else if (v == "scaled_linear") {
                 c.sampler.spacing = Spacing::kScaledLinear;
             } else {
                 throw ParseError("bad sampler.spacing: " + v);
             }
         }},
        {"sampler.steps",
         [](PipelineConfig& c, const std::string& v) { c.sampler.steps = parse_int(v, "sampler.steps"); }},
        {"sampler.switch_step",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.switch_step = parse_int(v, "sampler.switch_step");
         }},
        {"sampler.guidance_scale",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.guidance_scale = parse_double(v, "sampler.guidance_scale");
         }},
        {"sampler.blend_lambda",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.blend_lambda = parse_double(v, "sampler.blend_lambda");
         }},
        {"sampler.blend_window",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.blend_window = parse_int(v, "sampler.blend_window");
         }},
        {"sampler.frames",
         [](PipelineConfig& c, const std::string& v) { c.sampler.frames = parse_int(v, "sampler.frames"); }},
        {"sampler.channels",
         [](PipelineConfig& c, const std::string& v) { c.sampler.channels = parse_int(v, "sampler.channels"); }},
        {"sampler.height",
         [](PipelineConfig& c, const std::string& v) { c.sampler.height = parse_int(v, "sampler.height"); }},
        {"sampler.width",
         [](PipelineConfig& c, const std::string& v) { c.sampler.width = parse_int(v, "sampler.width"); }},
        {"sampler.mock",
         [](PipelineConfig& c, const std::string& v) {
             if (v != "oracle" && v != "gaussian" && v != "director_sensitive") {
                 throw ParseError("bad sampler.mock: " + v);
             }
             c.sampler.mock = v;
         }},
        {"sampler.share_reference",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.share_reference = parse_int(v, "sampler.share_reference") != 0;
         }},
        {"sampler.refine_t0",
         [](PipelineConfig& c, const std::string& v) { c.sampler.refine_t0 = parse_int(v, "sampler.refine_t0"); }},
        {"sampler.refine_repeats",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.refine_repeats = parse_int(v, "sampler.refine_repeats");
         }},
        {"sampler.refine_mid",
         [](PipelineConfig& c, const std::string& v) {
             c.sampler.refine_mid = parse_int(v, "sampler.refine_mid");
         }},

        {"loss.w_l1",
         [](PipelineConfig& c, const std::string& v) { c.loss.weights.l1 = parse_double(v, "loss.w_l1"); }},
        {"loss.w_ssim",
         [](PipelineConfig& c, const std::string& v) { c.loss.weights.ssim = parse_double(v, "loss.w_ssim"); }},
        {"loss.w_lpips",
         [](PipelineConfig& c, const std::string& v) { c.loss.weights.lpips = parse_double(v, "loss.w_lpips"); }},
        {"loss.w_tv",
         [](PipelineConfig& c, const std::string& v) { c.loss.weights.tv = parse_double(v, "loss.w_tv"); }},
        {"loss.ssim_window",
         [](PipelineConfig& c, const std::string& v) { c.loss.ssim_window = parse_int(v, "loss.ssim_window"); }},
        {"loss.ssim_sigma",
         [](PipelineConfig& c, const std::string& v) { c.loss.ssim_sigma = parse_double(v, "loss.ssim_sigma"); }},

        {"plan.margin",
         [](PipelineConfig& c, const std::string& v) { c.plan.margin = parse_double(v, "plan.margin"); }},
    };
    return table;
}

} // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str(), path);
}

PipelineConfig PipelineConfig::from_string(const std::string& text, const std::string& origin) {
    PipelineConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section = "general";
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& table = setters();
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": unknown key " + key);
        }
        it->second(config, value);
    }
    return config;
}

std::string PipelineConfig::canonical_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "[general]\n";
    out << "seed = " << rng_seed << "\n";
    out << "threads = " << threads << "\n";
    out << "[filter]\n";
    out << "max_xy_aspect_ratio = " << filter.max_xy_aspect_ratio << "\n";
    out << "min_angular_span_deg = " << filter.min_angular_span_deg << "\n";
    out << "distance_weight = " << filter.distance_weight << "\n";
    out << "target_class = " << to_string(filter.target_class) << "\n";
    out << "[tsdf]\n";
    out << "voxel_size = " << tsdf.voxel_size << "\n";
    out << "grid_dim = " << tsdf.grid_dim << "\n";
    out << "origin_x = " << tsdf.origin_x << "\n";
    out << "origin_y = " << tsdf.origin_y << "\n";
    out << "origin_z = " << tsdf.origin_z << "\n";
    out << "truncation = " << tsdf.truncation << "\n";
    out << "max_weight = " << tsdf.max_weight << "\n";
    out << "occupancy_band = " << tsdf.occupancy_band << "\n";
    out << "[flow]\n";
    out << "eps_static = " << flow.eps_static << "\n";
    out << "eps_dyn = " << flow.eps_dyn << "\n";
    out << "min_static = " << flow.policy.min_static << "\n";
    out << "min_dynamic = " << flow.policy.min_dynamic << "\n";
    out << "max_uniformity = " << flow.policy.max_uniformity << "\n";
    out << "w_mask = " << flow.ref_weights.w_mask << "\n";
    out << "w_flow = " << flow.ref_weights.w_flow << "\n";
    out << "[sampler]\n";
    out << "train_timesteps = " << sampler.train_timesteps << "\n";
    out << "beta_start = " << sampler.beta_start << "\n";
    out << "beta_end = " << sampler.beta_end << "\n";
    out << "spacing = " << (sampler.spacing == Spacing::kLinear ? "linear" : "scaled_linear") << "\n";
    out << "steps = " << sampler.steps << "\n";
    out << "switch_step = " << sampler.switch_step << "\n";
    out << "guidance_scale = " << sampler.guidance_scale << "\n";
    out << "blend_lambda = " << sampler.blend_lambda << "\n";
    out << "blend_window = " << sampler.blend_window << "\n";
    out << "frames = " << sampler.frames << "\n";
    out << "channels = " << sampler.channels << "\n";
    out << "height = " << sampler.height << "\n";
    out << "width = " << sampler.width << "\n";
    out << "mock = " << sampler.mock << "\n";
    out << "share_reference = " << (sampler.share_reference ? 1 : 0) << "\n";
    out << "refine_t0 = " << sampler.refine_t0 << "\n";
    out << "refine_repeats = " << sampler.refine_repeats << "\n";
    out << "refine_mid = " << sampler.refine_mid << "\n";
    out << "[loss]\n";
    out << "w_l1 = " << loss.weights.l1 << "\n";
    out << "w_ssim = " << loss.weights.ssim << "\n";
    out << "w_lpips = " << loss.weights.lpips << "\n";
    out << "w_tv = " << loss.weights.tv << "\n";
    out << "ssim_window = " << loss.ssim_window << "\n";
    out << "ssim_sigma = " << loss.ssim_sigma << "\n";
    out << "[plan]\n";
    out << "margin = " << plan.margin << "\n";
    return out.str();
}

std::string PipelineConfig::config_hash() const {
    Fnv1a64 h;
    h.update(canonical_text());
    return h.hex();
}

nlohmann::ordered_json RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["argv"] = argv;
    j["config_hash"] = config_hash;
    j["input_digests"] = input_digests;
    j["output_digests"] = output_digests;
    j["wall_time_ms"] = wall_time_ms;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config_hash = j.value("config_hash", "");
    m.input_digests = j.value("input_digests", std::map<std::string, std::string>{});
    m.output_digests = j.value("output_digests", std::map<std::string, std::string>{});
    m.wall_time_ms = j.value("wall_time_ms", 0.0);
    return m;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    out << to_json().dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad run manifest " + path + ": " + e.what());
    }
    return from_json(j);
}

} // namespace dforge
