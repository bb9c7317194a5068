#include "opbeam/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace opbeam {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) {
        throw ParseError(std::string("missing field \"") + name + "\"");
    }
    return *it;
}

template <typename T>
T typed(const json& value, const std::string& where) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ParseError("field \"" + where + "\" has the wrong type");
    }
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
    json j;
    j["n"] = inst.size();
    j["t_max"] = inst.t_max();
    j["start"] = inst.start();
    j["end"] = inst.end();
    j["prize"] = inst.prizes();
    j["cost"] = inst.cost_rows();
    if (inst.coords()) {
        json pts = json::array();
        for (const auto& p : *inst.coords()) pts.push_back({p.x, p.y});
        j["coords"] = std::move(pts);
    }
    return j.dump() + "\n";
}

Instance instance_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) {
        throw ParseError("instance file must hold a JSON object");
    }
    const int n = typed<int>(field(j, "n"), "n");
    const double t_max = typed<double>(field(j, "t_max"), "t_max");
    const int start = typed<int>(field(j, "start"), "start");
    const int end = typed<int>(field(j, "end"), "end");
    auto prize = typed<std::vector<double>>(field(j, "prize"), "prize");
    auto cost = typed<std::vector<std::vector<double>>>(field(j, "cost"), "cost");
    if (n < 1 || static_cast<std::size_t>(n) != cost.size()) {
        throw ParseError("field \"n\" = " + std::to_string(n) + " disagrees with " +
                         std::to_string(cost.size()) + " cost rows");
    }
    std::optional<std::vector<Point>> coords;
    if (auto it = j.find("coords"); it != j.end()) {
        auto raw = typed<std::vector<std::vector<double>>>(*it, "coords");
        coords.emplace();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i].size() != 2) {
                throw ParseError("field \"coords\" entry " + std::to_string(i) + " is not an [x, y] pair");
            }
            coords->push_back({raw[i][0], raw[i][1]});
        }
    }
    return Instance::create(cost, std::move(prize), t_max, start, end, std::move(coords));
}

Instance read_instance(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw std::runtime_error("cannot open " + file.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return instance_from_json(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(file.string() + ": " + e.what());
    }
}

void write_instance(const Instance& inst, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + file.string());
    }
    out << instance_to_json(inst);
}

}  // namespace opbeam
