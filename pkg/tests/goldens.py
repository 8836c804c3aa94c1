# Normal-form goldens for odd t in 5..95: (t, exact m_t computed here, plotted m_t, tau_t).
NORMAL_FORM = [
    (5, "325/16", 20.312, 73),
    (7, "77/2", 38.500, 63),
    (9, "73/2", 36.500, 51),
    (11, "247/4", 61.750, 61),
    (13, "1511/8", 188.88, 259),
    (15, "1321/8", 165.12, 261),
    (17, "4381/16", 273.81, 251),
    (19, "8959/32", 279.97, 157),
    (21, "2621/8", 327.62, 189),
    (23, "3851/8", 481.38, 235),
    (25, "945/4", 236.25, 121),
    (27, "2645/8", 330.62, 227),
    (29, "57225/64", 894.14, 431),
    (31, "11593/16", 724.56, 595),
    (33, "2531/4", 632.75, 147),
    (35, "97661/128", 762.98, 1179),
    (37, "975781/1024", 952.91, 1253),
    (39, "2859/4", 714.75, 173),
    (41, "3181/4", 795.25, 383),
    (43, "75711/64", 1183.0, 593),
    (45, "3075/2", 1537.5, 319),
    (47, "871/1", 871., 153),
    (49, "19405/16", 1212.8, 273),
    (51, "22053/16", 1378.3, 415),
    (53, "13385/8", 1673.1, 351),
    (55, "1357/1", 1357., 231),
    (57, "32945/16", 2059.1, 313),
    (59, "2794/1", 2794., 449),
    (61, "80081/32", 2502.5, 587),
    (63, "37799/16", 2362.4, 309),
    (65, "58267/16", 3641.7, 689),
    (67, "4697/2", 2348.5, 287),
    (69, "25225/8", 3153.1, 695),
    (71, "8587/4", 2146.8, 271),
    (73, "970047/256", 3789.2, 931),
    (75, "28381/8", 3547.6, 379),
    (77, "42241/16", 2640.1, 425),
    (79, "6867/2", 3433.5, 303),
    (81, "15435/4", 3858.8, 357),
    (83, "197145/32", 6160.8, 857),
    (85, "104681/32", 3271.3, 719),
    (87, "68493/8", 8561.6, 1129),
    (89, "146637/32", 4582.4, 685),
    (91, "83569/16", 5223.1, 783),
    (93, "1315215/256", 5137.6, 2491),
    (95, "14465/4", 3616.2, 327),
]
