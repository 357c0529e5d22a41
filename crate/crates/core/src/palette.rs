//! Fixed 256-entry escape-step palette: a blue-to-warm gradient used
//! by the renderer.  The table is part of the output contract: renders
//! are byte-exact against it.

pub const PALETTE: [[u8; 3]; 256] = [
    [0, 37, 89], [0, 38, 95], [0, 39, 100], [0, 40, 104], [0, 41, 108], [0, 43, 112], [0, 44, 116], [0, 45, 119],
    [0, 46, 123], [0, 47, 126], [0, 49, 129], [0, 50, 132], [0, 51, 135], [0, 52, 139], [0, 54, 142], [0, 55, 144],
    [0, 56, 147], [0, 58, 150], [0, 59, 153], [0, 60, 156], [0, 62, 158], [0, 63, 161], [0, 64, 164], [0, 66, 166],
    [0, 67, 169], [0, 68, 171], [0, 70, 174], [0, 71, 176], [0, 73, 178], [0, 74, 181], [0, 76, 183], [0, 77, 185],
    [0, 78, 188], [0, 80, 190], [0, 81, 192], [0, 83, 194], [0, 84, 196], [0, 86, 198], [0, 87, 200], [0, 89, 202],
    [0, 90, 204], [0, 92, 206], [0, 93, 208], [0, 95, 210], [1, 96, 212], [2, 98, 213], [3, 99, 215], [4, 101, 217],
    [5, 102, 219], [7, 104, 220], [8, 106, 222], [9, 107, 223], [10, 109, 225], [11, 110, 226], [13, 112, 228], [14, 113, 229],
    [15, 115, 231], [17, 116, 232], [18, 118, 233], [19, 120, 234], [20, 121, 236], [22, 123, 237], [23, 124, 238], [24, 126, 239],
    [26, 127, 240], [27, 129, 241], [28, 131, 242], [30, 132, 243], [31, 134, 244], [33, 135, 245], [34, 137, 246], [35, 138, 247],
    [37, 140, 247], [38, 141, 248], [39, 143, 249], [41, 145, 249], [42, 146, 250], [44, 148, 251], [45, 149, 251], [46, 151, 252],
    [48, 152, 252], [49, 154, 253], [51, 155, 253], [52, 157, 253], [54, 158, 254], [55, 160, 254], [56, 162, 254], [58, 163, 254],
    [59, 165, 254], [61, 166, 254], [62, 168, 254], [64, 169, 254], [65, 170, 254], [67, 172, 254], [68, 173, 254], [70, 175, 254],
    [71, 176, 254], [72, 178, 254], [74, 179, 254], [75, 181, 253], [77, 182, 253], [78, 183, 253], [80, 185, 252], [81, 186, 252],
    [83, 188, 251], [84, 189, 251], [86, 190, 250], [87, 192, 250], [89, 193, 249], [90, 194, 248], [92, 196, 247], [93, 197, 247],
    [95, 198, 246], [96, 200, 245], [98, 201, 244], [99, 202, 243], [101, 204, 242], [102, 205, 241], [104, 206, 240], [105, 207, 239],
    [107, 208, 238], [108, 210, 237], [110, 211, 236], [112, 212, 235], [113, 213, 233], [115, 214, 232], [116, 215, 231], [118, 217, 229],
    [119, 218, 228], [121, 219, 227], [122, 220, 225], [124, 221, 224], [125, 222, 222], [127, 223, 220], [129, 224, 219], [130, 225, 217],
    [132, 226, 215], [133, 227, 214], [135, 228, 212], [136, 229, 210], [138, 230, 208], [139, 231, 206], [141, 232, 204], [143, 233, 203],
    [144, 234, 201], [146, 234, 199], [147, 235, 197], [149, 236, 194], [150, 237, 192], [152, 238, 190], [154, 238, 188], [155, 239, 186],
    [157, 240, 183], [158, 241, 181], [160, 241, 179], [161, 242, 176], [163, 243, 174], [165, 243, 172], [166, 244, 169], [168, 245, 167],
    [169, 245, 164], [171, 246, 161], [173, 246, 159], [174, 247, 156], [176, 247, 153], [177, 248, 151], [179, 248, 148], [181, 249, 145],
    [182, 249, 142], [184, 250, 139], [185, 250, 136], [187, 251, 133], [189, 251, 130], [190, 251, 126], [192, 252, 123], [193, 252, 120],
    [195, 252, 116], [197, 253, 113], [198, 253, 109], [200, 253, 105], [201, 253, 101], [203, 253, 96], [205, 254, 90], [206, 254, 89],
    [208, 254, 89], [210, 254, 89], [211, 254, 89], [213, 254, 89], [214, 254, 89], [216, 254, 89], [218, 254, 89], [219, 254, 89],
    [221, 254, 89], [223, 254, 89], [224, 254, 89], [226, 254, 89], [227, 254, 89], [229, 254, 89], [231, 254, 89], [232, 254, 89],
    [234, 254, 89], [236, 254, 89], [237, 253, 89], [239, 253, 89], [241, 253, 89], [242, 253, 89], [244, 252, 89], [245, 252, 89],
    [247, 252, 89], [249, 251, 89], [250, 251, 89], [252, 251, 89], [254, 250, 89], [255, 250, 89], [255, 250, 89], [255, 249, 89],
    [255, 249, 89], [255, 248, 89], [255, 248, 89], [255, 247, 89], [255, 247, 89], [255, 246, 89], [255, 245, 89], [255, 245, 89],
    [255, 244, 89], [255, 244, 89], [255, 243, 89], [255, 242, 89], [255, 242, 89], [255, 241, 89], [255, 240, 89], [255, 240, 89],
    [255, 239, 89], [255, 238, 89], [255, 237, 89], [255, 236, 89], [255, 236, 89], [255, 235, 89], [255, 234, 89], [255, 233, 89],
    [255, 232, 89], [255, 231, 89], [255, 230, 89], [255, 229, 89], [255, 229, 89], [255, 228, 89], [255, 227, 89], [255, 226, 89],
    [255, 225, 89], [255, 224, 89], [255, 223, 89], [255, 221, 89], [255, 220, 89], [255, 219, 89], [255, 218, 89], [255, 217, 89],
];
