#include "maskguide/checkpoint.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "maskguide/errors.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace mg {

std::string sha256_hex(const void* data, std::size_t n) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data, n, md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open file for hashing: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes.data(), bytes.size());
}

namespace {
std::string tensor_filename(const std::string& name) {
    std::string f = name;
    for (auto& c : f)
        if (c == '.' || c == '/') c = '_';
    return f + ".bin";
}
}  // namespace

void save_checkpoint(const std::string& dir, const ParamStore& ps, const Geometry& geo) {
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = "maskguide-checkpoint-v1";
    manifest["geometry"] = {{"image", geo.image}, {"latent", geo.latent}};
    json tensors = json::array();
    for (const auto& [name, t] : ps.t) {
        std::string file = tensor_filename(name);
        std::string path = dir + "/" + file;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw CheckpointError("cannot write tensor file: " + path);
        f.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        f.close();
        tensors.push_back({{"name", name},
                           {"shape", t.shape},
                           {"dtype", "f32"},
                           {"file", file},
                           {"sha256", sha256_hex(t.data.data(), t.data.size() * sizeof(float))}});
    }
    manifest["tensors"] = std::move(tensors);
    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw CheckpointError("cannot write manifest in " + dir);
    mf << manifest.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw CheckpointError("missing checkpoint manifest: " + dir + "/manifest.json");
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::exception& e) {
        throw CheckpointError("unparseable manifest in " + dir + ": " + e.what());
    }
    if (manifest.value("format", "") != "maskguide-checkpoint-v1")
        throw CheckpointError("unknown checkpoint format in " + dir);

    LoadedCheckpoint out;
    out.geometry.image = manifest.at("geometry").at("image").get<int>();
    out.geometry.latent = manifest.at("geometry").at("latent").get<int>();
    if (out.geometry.image != out.geometry.latent * kAutoencoderFactor)
        throw CheckpointError("inconsistent geometry in manifest: " + dir);

    for (const auto& entry : manifest.at("tensors")) {
        std::string name = entry.at("name").get<std::string>();
        std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
        std::string path = dir + "/" + entry.at("file").get<std::string>();
        std::ifstream f(path, std::ios::binary);
        if (!f) throw CheckpointError("missing tensor file: " + path);
        std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        if (bytes.size() != static_cast<std::size_t>(numel_of(shape)) * sizeof(float))
            throw CheckpointError("tensor size mismatch for " + name + " in " + dir);
        if (sha256_hex(bytes.data(), bytes.size()) != entry.at("sha256").get<std::string>())
            throw CheckpointError("sha256 mismatch for tensor " + name + " in " + dir);
        Tensor t(shape);
        std::memcpy(t.data.data(), bytes.data(), bytes.size());
        if (!t.all_finite()) throw CheckpointError("non-finite values in tensor " + name);
        if (out.params.t.count(name)) throw CheckpointError("duplicate tensor name " + name);
        out.params.t[name] = std::move(t);
    }
    return out;
}

}  // namespace mg
