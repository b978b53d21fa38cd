#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cvcl/model.hpp"

namespace cvcl {

// Text checkpoint: header describing the architecture, then one decimal
// parameter array per line in ParamStore order, 17 significant digits.
template <typename T>
void save_checkpoint(CvclModel<T>& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open checkpoint for writing: " + path);
    out << "cvcl-checkpoint 1\n";
    out << "n_views " << model.n_views() << "\n";
    out << "n_clusters " << model.n_clusters() << "\n";
    out << "dims";
    for (int d : model.view_dims()) out << " " << d;
    out << "\nhidden";
    for (int h : model.config().hidden) out << " " << h;
    out << "\nr1 " << model.config().r1 << "\n";
    out << "r2 " << model.config().r2 << "\n";
    out << "head_relu " << (model.config().head_relu ? 1 : 0) << "\n";
    ParamStore<T> store;
    model.collect_params(store);
    char buf[64];
    for (std::size_t i = 0; i < store.size(); ++i) {
        const auto& e = store.entry(i);
        out << "param " << e.name << " " << e.value->rows() << " " << e.value->cols() << "\n";
        auto d = e.value->data();
        for (std::size_t k = 0; k < d.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(d[k]));
            out << (k ? " " : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw FormatError("failed writing checkpoint: " + path);
}

template <typename T>
CvclModel<T> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    auto expect = [&](const std::string& key) {
        std::string k;
        if (!(in >> k) || k != key)
            throw FormatError("checkpoint " + path + ": expected '" + key + "', got '" + k + "'");
    };
    expect("cvcl-checkpoint");
    int version = 0;
    in >> version;
    if (version != 1) throw FormatError("checkpoint " + path + ": unsupported format_version");
    expect("n_views");
    std::size_t n_views = 0;
    in >> n_views;
    expect("n_clusters");
    int k = 0;
    in >> k;
    expect("dims");
    std::vector<int> dims(n_views);
    for (auto& d : dims) in >> d;
    std::string tok;
    in >> tok;
    if (tok != "hidden") throw FormatError("checkpoint " + path + ": expected 'hidden'");
    ModelConfig cfg;
    cfg.hidden.clear();
    while (in >> tok && tok != "r1") cfg.hidden.push_back(std::stoi(tok));
    in >> cfg.r1;
    expect("r2");
    in >> cfg.r2;
    expect("head_relu");
    int hr = 0;
    in >> hr;
    cfg.head_relu = hr != 0;
    if (!in) throw FormatError("checkpoint " + path + ": truncated header");

    CvclModel<T> model = CvclModel<T>::make(dims, k, cfg, 0);
    ParamStore<T> store;
    model.collect_params(store);
    for (std::size_t i = 0; i < store.size(); ++i) {
        const auto& e = store.entry(i);
        std::string key, name;
        std::size_t rows = 0, cols = 0;
        if (!(in >> key >> name >> rows >> cols) || key != "param")
            throw FormatError("checkpoint " + path + ": missing parameter array " +
                              std::to_string(i));
        if (name != e.name || rows != e.value->rows() || cols != e.value->cols())
            throw FormatError("checkpoint " + path + ": parameter mismatch at " + name +
                              " (expected " + e.name + ")");
        for (auto& v : e.value->data()) {
            double x;
            if (!(in >> x)) throw FormatError("checkpoint " + path + ": truncated values in " + name);
            v = static_cast<T>(x);
        }
    }
    return model;
}

}  // namespace cvcl
