#include "ldh/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json_io.hpp"

namespace ldh {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path)
{
    detail::json index = detail::json::array();
    for (const auto& [name, t] : ckpt.tensors) {
        const Shape& s = t.shape();
        index.push_back({{"name", name}, {"shape", {s.n, s.c, s.h, s.w}}});
    }
    detail::json config;
    try {
        config = detail::json::parse(ckpt.config_json);
    } catch (const detail::json::exception& e) {
        throw CheckpointError(std::string("checkpoint config echo is not JSON: ") + e.what());
    }
    const detail::json header{{"format", kCheckpointMagic},
                              {"network", detail::to_json(ckpt.network)},
                              {"config", config},
                              {"step", ckpt.step},
                              {"epoch", ckpt.epoch},
                              {"rng_state", ckpt.rng_state},
                              {"tensors", index}};
    const std::string text = header.dump();

    // Write-then-rename so an interrupted save never leaves a torn file.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw CheckpointError("cannot write checkpoint: " + tmp.string());
        }
        out << kCheckpointMagic << '\n';
        const std::uint64_t len = text.size();
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& [name, t] : ckpt.tensors) {
            out.write(reinterpret_cast<const char*>(t.data().data()),
                      static_cast<std::streamsize>(t.size() * sizeof(double)));
        }
        if (!out) {
            throw CheckpointError("failed writing checkpoint: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CheckpointError("cannot open checkpoint: " + path.string());
    }
    std::string magic;
    std::getline(in, magic);
    if (magic != kCheckpointMagic) {
        throw CheckpointError("not an LDH-CKPT-1 checkpoint: " + path.string());
    }
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || len > (1ULL << 30)) {
        throw CheckpointError("corrupt checkpoint header: " + path.string());
    }
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    if (!in) {
        throw CheckpointError("truncated checkpoint header: " + path.string());
    }

    Checkpoint ckpt;
    try {
        const auto header = detail::json::parse(text);
        ckpt.network = detail::network_from_json(header.at("network"));
        ckpt.config_json = header.at("config").dump();
        ckpt.step = header.at("step").get<std::uint64_t>();
        ckpt.epoch = header.at("epoch").get<int>();
        ckpt.rng_state = header.at("rng_state").get<std::string>();
        for (const auto& entry : header.at("tensors")) {
            const auto dims = entry.at("shape").get<std::vector<int>>();
            if (dims.size() != 4) {
                throw CheckpointError("tensor shape must have 4 dimensions");
            }
            Tensor t(Shape{dims[0], dims[1], dims[2], dims[3]});
            in.read(reinterpret_cast<char*>(t.data().data()),
                    static_cast<std::streamsize>(t.size() * sizeof(double)));
            if (!in) {
                throw CheckpointError("truncated tensor data in " + path.string());
            }
            ckpt.tensors.emplace(entry.at("name").get<std::string>(), std::move(t));
        }
    } catch (const detail::json::exception& e) {
        throw CheckpointError("malformed checkpoint header: " + std::string(e.what()));
    }
    return ckpt;
}

void store_parameters(Checkpoint& ckpt, const Models& models)
{
    ckpt.network = models.config;
    for (const auto& p : models.parameters()) {
        ckpt.tensors.insert_or_assign(p.name, p.var.value());
    }
}

Models restore_models(const Checkpoint& ckpt)
{
    Models models = init_params(ckpt.network, 0);
    for (const auto& p : models.parameters()) {
        const auto it = ckpt.tensors.find(p.name);
        if (it == ckpt.tensors.end()) {
            throw CheckpointError("checkpoint lacks parameter " + p.name);
        }
        if (!(it->second.shape() == p.var.shape())) {
            throw CheckpointError("parameter " + p.name + " has shape " + it->second.shape().str()
                                  + ", expected " + p.var.shape().str());
        }
        p.var.mutable_value() = it->second;
    }
    return models;
}

} // namespace ldh
