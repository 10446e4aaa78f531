#include "priorseg/conventions.hpp"

namespace priorseg {

const std::map<std::string, std::string>& convention_notes() {
    static const std::map<std::string, std::string> notes{
        {"quantile_rule", "linear interpolation on sorted values, rank = q*(n-1)"},
        {"hd_direction_rule", "percentile per direction, then max of the two directions"},
        {"distance_model", "voxel-center Euclidean distances in mm from header spacing"},
        {"empty_mask_rule", "DSC(empty,empty)=1, DSC(empty,nonempty)=0, HD undefined if either empty"},
        {"zscore_scope", "mean/std over all voxels of the channel; constant channel maps to zeros"},
        {"intensity_rule", "structure i of N gets round(255*i/N) in vocabulary order; equal mode 255"},
        {"overlap_rule", "structure with fewer foreground voxels wins; ties to earlier vocabulary entry"},
        {"cropz_order", "z-score applied after the 0/255 exterior fill"},
        {"region_boundary_rule",
         "b1 = top slice of vertebra_T1, b2 = top slice of stomach, b3 = bottom slice of "
         "vertebra_L4; HN=(b1,top], THX=(b2,b1], ABDM=[b3,b2], PELV=[bottom,b3)"},
        {"gap_sign", "AGD/MGD stored signed as male minus female; tables print magnitude with direction"},
    };
    return notes;
}

}  // namespace priorseg
