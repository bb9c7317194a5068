#include "opbeam/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "opbeam/instance_io.hpp"
#include "config_json.hpp"

namespace opbeam {

using nlohmann::json;

namespace {
constexpr const char* kFormat = "opbeam-qnetwork";
}

namespace detail {

json network_config_to_json(const QNetworkConfig& cfg) {
    return json{{"hidden", cfg.hidden},
                {"gat_heads", cfg.gat_heads},
                {"tel_heads", cfg.tel_heads},
                {"tel_layers", cfg.tel_layers},
                {"ff_multiplier", cfg.ff_multiplier},
                {"leaky_slope", cfg.leaky_slope},
                {"gat_activation", std::string(to_string(cfg.gat_activation))},
                {"seed", cfg.seed}};
}

QNetworkConfig network_config_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("network config must be an object");
    QNetworkConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "hidden") cfg.hidden = value.get<int>();
        else if (key == "gat_heads") cfg.gat_heads = value.get<int>();
        else if (key == "tel_heads") cfg.tel_heads = value.get<int>();
        else if (key == "tel_layers") cfg.tel_layers = value.get<int>();
        else if (key == "ff_multiplier") cfg.ff_multiplier = value.get<int>();
        else if (key == "leaky_slope") cfg.leaky_slope = value.get<double>();
        else if (key == "gat_activation") cfg.gat_activation = parse_activation(value.get<std::string>());
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else throw ParseError("unknown network config key \"" + key + "\"");
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return cfg;
}

}  // namespace detail

std::string checkpoint_to_json(const QNetworkConfig& cfg, const QNetworkParams& params) {
    json tensors = json::array();
    params.for_each([&](const std::string& name, const Matrix& t) {
        std::vector<double> data(t.data(), t.data() + t.size());  // row-major storage
        tensors.push_back({{"name", name}, {"shape", {t.rows(), t.cols()}}, {"data", std::move(data)}});
    });
    json j;
    j["format"] = kFormat;
    j["version"] = kCheckpointVersion;
    j["config"] = detail::network_config_to_json(cfg);
    j["tensors"] = std::move(tensors);
    return j.dump() + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    try {
        if (j.value("format", std::string()) != kFormat) {
            throw ParseError("not a q-network checkpoint (format tag missing)");
        }
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw ParseError("unsupported checkpoint version " + std::to_string(version));
        }
        Checkpoint ck;
        ck.config = detail::network_config_from_json(j.at("config"));
        ck.params = QNetworkParams::zeros(ck.config);
        const json& tensors = j.at("tensors");
        std::size_t index = 0;
        ck.params.for_each([&](const std::string& name, Matrix& t) {
            if (index >= tensors.size()) {
                throw ParseError("checkpoint is missing tensor " + name);
            }
            const json& entry = tensors[index++];
            if (entry.at("name").get<std::string>() != name) {
                throw ParseError("expected tensor " + name + ", found " + entry.at("name").get<std::string>());
            }
            const auto shape = entry.at("shape").get<std::vector<long>>();
            if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols()) {
                throw ParseError("tensor " + name + " has a shape that does not match the config");
            }
            const auto data = entry.at("data").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(data.size()) != t.size()) {
                throw ParseError("tensor " + name + " has the wrong number of values");
            }
            std::copy(data.begin(), data.end(), t.data());
        });
        if (index != tensors.size()) {
            throw ParseError("checkpoint has unexpected extra tensors");
        }
        return ck;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& file, const QNetworkConfig& cfg,
                     const QNetworkParams& params) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << checkpoint_to_json(cfg, params);
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open checkpoint " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_json(buf.str());
}

}  // namespace opbeam
