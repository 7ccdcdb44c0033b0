#include "webca/tectum.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iomanip>

namespace webca::tectum {

std::string event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::ObjectEcho: return "object_echo";
        case EventKind::ExternalLowFreqField: return "external_low_freq_field";
        case EventKind::ConspecificChirp: return "conspecific_chirp";
        case EventKind::Quiet: return "quiet";
    }
    return "?";
}

FeatureVector assemble_features(const maps::MapActivity& cms, const maps::MapActivity& cls,
                                const maps::MapActivity& ls,
                                const std::vector<double>& burst_rates) {
    if (cms.tick != cls.tick || cls.tick != ls.tick)
        throw TickMismatch("map activities must come from the same tick");
    if (cms.segment != maps::SegmentId::CMS || cls.segment != maps::SegmentId::CLS ||
        ls.segment != maps::SegmentId::LS)
        throw TickMismatch("map activities passed in the wrong segment order");
    if (burst_rates.size() != 3) throw TickMismatch("expected one burst rate per segment");

    FeatureVector f;
    f.tick = cms.tick;
    f.values.reserve(cms.activity.size() + cls.activity.size() + ls.activity.size() + 3);
    f.values.insert(f.values.end(), cms.activity.begin(), cms.activity.end());
    f.values.insert(f.values.end(), cls.activity.begin(), cls.activity.end());
    f.values.insert(f.values.end(), ls.activity.begin(), ls.activity.end());
    f.values.insert(f.values.end(), burst_rates.begin(), burst_rates.end());
    return f;
}

Decoder fit_decoder(const std::vector<TrainingSample>& samples, double lambda) {
    if (samples.size() < 2) throw SingularSystem("decoder fit needs at least 2 samples");
    if (lambda < 0.0) throw SingularSystem("ridge lambda must be >= 0");
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto p = static_cast<Eigen::Index>(samples.front().features.values.size());
    const auto q = static_cast<Eigen::Index>(samples.front().position.size());
    for (const auto& s : samples) {
        if (static_cast<Eigen::Index>(s.features.values.size()) != p ||
            static_cast<Eigen::Index>(s.position.size()) != q)
            throw SingularSystem("inconsistent feature or label dimensions");
    }

    // Augmented design matrix [F | 1]; bias column unpenalized.
    Eigen::MatrixXd a(n, p + 1);
    Eigen::MatrixXd y(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j)
            a(i, j) = samples[static_cast<size_t>(i)].features.values[static_cast<size_t>(j)];
        a(i, p) = 1.0;
        for (Eigen::Index j = 0; j < q; ++j)
            y(i, j) = samples[static_cast<size_t>(i)].position[static_cast<size_t>(j)];
    }

    Eigen::MatrixXd gram = a.transpose() * a;
    for (Eigen::Index j = 0; j < p; ++j) gram(j, j) += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw SingularSystem("normal equations are not solvable");
    Eigen::MatrixXd sol = ldlt.solve(a.transpose() * y);  // (p+1) x q
    if (lambda == 0.0) {
        // LDLT tolerates rank deficiency silently; detect it via the residual
        // of the normal equations.
        const double resid = (gram * sol - a.transpose() * y).norm();
        const double scale = std::max(1.0, (a.transpose() * y).norm());
        if (!(resid / scale < 1e-8))
            throw SingularSystem("rank-deficient system with lambda = 0");
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        if (!lu.isInvertible()) throw SingularSystem("rank-deficient system with lambda = 0");
    }

    Decoder d;
    d.ridge_lambda = lambda;
    d.trained = true;
    d.weights.assign(static_cast<size_t>(q), std::vector<double>(static_cast<size_t>(p), 0.0));
    d.bias.assign(static_cast<size_t>(q), 0.0);
    for (Eigen::Index o = 0; o < q; ++o) {
        for (Eigen::Index j = 0; j < p; ++j)
            d.weights[static_cast<size_t>(o)][static_cast<size_t>(j)] = sol(j, o);
        d.bias[static_cast<size_t>(o)] = sol(p, o);
    }

    d.feature_mean.assign(static_cast<size_t>(p), 0.0);
    for (const auto& s : samples)
        for (size_t j = 0; j < s.features.values.size(); ++j)
            d.feature_mean[j] += s.features.values[j];
    for (auto& v : d.feature_mean) v /= static_cast<double>(n);
    double mean_dist = 0.0;
    for (const auto& s : samples) {
        double acc = 0.0;
        for (size_t j = 0; j < s.features.values.size(); ++j) {
            const double dlt = s.features.values[j] - d.feature_mean[j];
            acc += dlt * dlt;
        }
        mean_dist += std::sqrt(acc);
    }
    d.novelty_scale = std::max(1e-12, mean_dist / static_cast<double>(n));
    return d;
}

DecodedPosition decode_position(const Decoder& decoder, const FeatureVector& f) {
    if (!decoder.trained) throw Untrained("decoder has not been fitted");
    if (f.values.size() != decoder.weights.front().size())
        throw SingularSystem("feature length does not match decoder");
    DecodedPosition out;
    out.position.resize(decoder.weights.size());
    for (size_t o = 0; o < decoder.weights.size(); ++o) {
        double acc = decoder.bias[o];
        for (size_t j = 0; j < f.values.size(); ++j) acc += decoder.weights[o][j] * f.values[j];
        out.position[o] = acc;
    }
    double dist = 0.0;
    for (size_t j = 0; j < f.values.size(); ++j) {
        const double dlt = f.values[j] - decoder.feature_mean[j];
        dist += dlt * dlt;
    }
    const double c = std::exp(-std::sqrt(dist) / decoder.novelty_scale);
    out.confidence = std::min(1.0, std::max(0.0, c));
    return out;
}

void save_decoder(const Decoder& d, const std::string& path) {
    if (!d.trained) throw Untrained("refusing to persist an unfitted decoder");
    std::ofstream out(path);
    if (!out) throw Error("cannot open decoder file for writing: " + path);
    out << std::setprecision(17);
    out << d.weights.size() << " " << d.weights.front().size() << " " << d.ridge_lambda << "\n";
    for (const auto& row : d.weights) {
        for (size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << row[j];
        out << "\n";
    }
    for (size_t j = 0; j < d.bias.size(); ++j) out << (j ? " " : "") << d.bias[j];
    out << "\n";
    for (size_t j = 0; j < d.feature_mean.size(); ++j) out << (j ? " " : "") << d.feature_mean[j];
    out << "\n" << d.novelty_scale << "\n";
}

Decoder load_decoder(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open decoder file: " + path);
    size_t q = 0, p = 0;
    Decoder d;
    in >> q >> p >> d.ridge_lambda;
    d.weights.assign(q, std::vector<double>(p, 0.0));
    for (auto& row : d.weights)
        for (auto& v : row) in >> v;
    d.bias.assign(q, 0.0);
    for (auto& v : d.bias) in >> v;
    d.feature_mean.assign(p, 0.0);
    for (auto& v : d.feature_mean) in >> v;
    in >> d.novelty_scale;
    if (!in) throw Error("malformed decoder file: " + path);
    d.trained = true;
    return d;
}

EventKind classify_event(const ClassifierInput& in, const ClassifierThresholds& thr) {
    if (in.cls_burst_rate >= thr.cls_burst_rate && in.cls_burst_rate > 0.0)
        return EventKind::ConspecificChirp;
    if (in.self_eod_on && in.cms_burst_rate >= thr.cms_burst_rate && in.cms_burst_rate > 0.0)
        return EventKind::ObjectEcho;
    if (!in.self_eod_on && in.mean_envelope_v >= thr.envelope_floor_v)
        return EventKind::ExternalLowFreqField;
    return EventKind::Quiet;
}

}  // namespace webca::tectum
