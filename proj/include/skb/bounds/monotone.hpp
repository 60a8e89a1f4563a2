// All implemented secrecy monotones on one tripartite state.
#pragma once

#include "skb/bounds/entanglement.hpp"
#include "skb/bounds/intrinsic.hpp"

namespace skb {

inline constexpr std::size_t kSplitDimCap = 64;
// above this dimension E_R uses its closed-form candidates only
inline constexpr std::size_t kRelEntSearchDimCap = 16;

// Alice–Bob marginal of a purification of ρ_ABE with the purifying system given to Alice,
// restricted to the local supports.
inline DensityState purification_split(const DensityState& rho) {
    detail::require_parts(rho, 3, "purification split");
    const auto pur = purify(rho, "R#");
    const auto& l = rho.layout().labels();
    const auto m = partial_trace(ComplexMatrix::projector(pur.vector), pur.layout, std::vector<std::string>{l[0], l[1], "R#"});
    const SubsystemLayout kept({l[0], l[1], "R#"}, {rho.layout().dims()[0], rho.layout().dims()[1], pur.layout.dims().back()});
    const auto split = regroup(DensityState::unchecked(kept, m), {{"AR", {l[0], "R#"}}, {"B", {l[1]}}});
    return compress_local_supports(split);
}

struct MonotoneReport {
    std::optional<BoundEstimate> dw;
    BoundEstimate intrinsic;
    BoundEstimate reduced;
    std::optional<BoundEstimate> squashed;
    std::optional<BoundEstimate> rel_ent;
    std::vector<std::string> skipped;
    bool ordering_ok = true;

    std::vector<const BoundEstimate*> all() const {
        std::vector<const BoundEstimate*> out;
        if (dw) out.push_back(&*dw);
        out.push_back(&intrinsic);
        out.push_back(&reduced);
        if (squashed) out.push_back(&*squashed);
        if (rel_ent) out.push_back(&*rel_ent);
        return out;
    }
};

inline MonotoneReport monotone_report(const DensityState& rho, const OptimizerConfig& cfg) {
    detail::require_parts(rho, 3, "monotone report");
    MonotoneReport rep;
    if (rho.is_classical(detail::label_at(rho, 0))) rep.dw = dw_lower_bound(rho);
    else rep.skipped.push_back("dw: Alice's register is not classical");
    rep.intrinsic = intrinsic_information(rho, cfg);
    rep.reduced = reduced_intrinsic_information(rho, ReducedOptions{}, cfg);

    const auto split = purification_split(rho);
    if (split.dim() <= kSplitDimCap) {
        rep.squashed = squashed_entanglement(split, cfg);
        RelEntOptions ro;
        ro.optimize = split.dim() <= kRelEntSearchDimCap;
        rep.rel_ent = relative_entropy_of_entanglement(split, ro, cfg);
    } else {
        rep.skipped.push_back("squashed, rel-ent: purification split dimension " + std::to_string(split.dim()) + " exceeds " +
                              std::to_string(kSplitDimCap));
    }
    if (rep.dw)
        for (const auto* e : rep.all())
            if (e->direction == Direction::upper_estimate && rep.dw->value > e->value + 1e-6) rep.ordering_ok = false;
    return rep;
}

}  // namespace skb
