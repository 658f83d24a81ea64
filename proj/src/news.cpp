#include "amkt/news.hpp"

#include <string>

namespace amkt {

NewsSource NewsSource::gaussian(std::uint64_t seed) { return NewsSource(seed); }

NewsSource NewsSource::scripted(const std::vector<ScriptedNews>& entries, std::uint64_t fallback_seed) {
    NewsSource src(fallback_seed);
    for (const auto& entry : entries) {
        for (std::size_t k = 0; k < entry.values.size(); ++k) {
            const auto t = entry.start_step + static_cast<std::int64_t>(k);
            if (!src.overrides_.emplace(t, entry.values[k]).second) {
                throw std::invalid_argument("scripted news entries overlap at step " + std::to_string(t));
            }
        }
    }
    return src;
}

double NewsSource::next(std::int64_t t) {
    if (t != cursor_) {
        throw SequenceError("news requested for step " + std::to_string(t) + " but cursor is at " +
                            std::to_string(cursor_));
    }
    ++cursor_;
    const double drawn = normal_(rng_);
    if (auto it = overrides_.find(t); it != overrides_.end()) {
        return it->second;
    }
    return drawn;
}

}  // namespace amkt
