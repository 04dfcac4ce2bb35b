"""Certificate constants, transcribed as exact rationals.

Polynomial entries of ``SX`` and ``SY`` are coefficient tuples indexed by the
power of mu. ``CX`` and ``CY`` are the characteristic-polynomial coefficient
tables: row ``i`` holds the coefficient of ``mu**i``, column ``j`` the power of
zeta.
"""

ETA = "1/5"
BETA = "-1/2"

LAMBDAS = ("4", "79/5", "81/5")

QX = (
    ("120", "-81/10", "-40"),
    ("-81/10", "1", "4"),
    ("-40", "4", "40"),
)
QY = (
    ("120", "0", "-40"),
    ("0", "1", "-4"),
    ("-40", "-4", "40"),
)

# The multiplier combination as printed: (weights on (lambda1, lambda2, lambda3), kind, indices).
# Grid indices: "t", "t+1", "*". Index order follows the valid-inequality signatures
#   smooth(x_i, y_j, x_k, y_l), convex(x_i, x_j, y_k), concave(y_i, y_j, x_k).
TERMS = (
    ((1, 0, 0), "smooth", ("t", "t", "t+1", "t+1")),
    ((0, 1, 0), "convex", ("t", "t+1", "t")),
    ((0, 1, 0), "convex", ("*", "t", "t")),
    ((0, 1, 0), "concave", ("t", "*", "*")),
    ((0, 0, 1), "convex", ("*", "t+1", "t+1")),
    ((0, 0, 1), "concave", ("t+1", "*", "*")),
    ((0, 0, 1), "concave", ("t", "t+1", "t")),
    ((0, 1, 1), "convex", ("t+1", "*", "*")),
    ((0, 1, 1), "concave", ("*", "t", "t+1")),
)

SX = (
    (("0", "16", "48",), ("0", "79/5",), ("0", "81/5",), ("0", "-32",), ("0", "-111/5", "-81/25",), ("0",), ("0", "-81/5",), ("0", "-81/10", "-16",)),
    (("0", "79/5",), ("79/5",), ("0",), ("0",), ("-79/5",), ("0",), ("0",), ("0",)),
    (("0", "81/5",), ("0",), ("81/5",), ("0",), ("0", "-81/25",), ("0",), ("-81/5",), ("0", "-81/10",)),
    (("0", "-32",), ("0",), ("0",), ("32",), ("0", "32/5",), ("0",), ("0",), ("0", "16",)),
    (("0", "-111/5", "-81/25",), ("-79/5",), ("0", "-81/25",), ("0", "32/5",), ("822/25", "-86/25", "-8/5",), ("-316/25",), ("-32/5", "241/25",), ("-44/5", "57/10", "8/5",)),
    (("0",), ("0",), ("0",), ("0",), ("-316/25",), ("79/5",), ("0",), ("79/10",)),
    (("0", "-81/5",), ("0",), ("-81/5",), ("0",), ("-32/5", "241/25",), ("0",), ("111/5", "-6",), ("4", "41/10",)),
    (("0", "-81/10", "-16",), ("0",), ("0", "-81/10",), ("0", "16",), ("-44/5", "57/10", "8/5",), ("79/10",), ("4", "41/10",), ("38", "-38", "16",)),
)
SY = (
    (("0", "16", "48",), ("0", "79/5",), ("0", "81/5",), ("0", "-32",), ("0",), ("0", "881/25",), ("0",), ("0", "79/10", "-16",)),
    (("0", "79/5",), ("79/5",), ("0",), ("0",), ("0",), ("0",), ("0",), ("0",)),
    (("0", "81/5",), ("0",), ("81/5",), ("0",), ("0",), ("0", "81/25",), ("0",), ("0", "-81/10",)),
    (("0", "-32",), ("0",), ("0",), ("32",), ("0",), ("-32",), ("0",), ("0",)),
    (("0",), ("0",), ("0",), ("0",), ("8", "-32/5", "-8/5",), ("0",), ("-8", "8",), ("-8", "48/5", "-8/5",)),
    (("0", "881/25",), ("0",), ("0", "81/25",), ("-32",), ("0",), ("1037/25", "192/125",), ("-284/25", "-8/5",), ("84/5", "-597/50",)),
    (("0",), ("0",), ("0",), ("0",), ("-8", "8",), ("-284/25", "-8/5",), ("111/5", "-6",), ("-121/10", "4",)),
    (("0", "79/10", "-16",), ("0",), ("0", "-81/10",), ("0",), ("-8", "48/5", "-8/5",), ("84/5", "-597/50",), ("-121/10", "4",), ("38", "-459/10", "16",)),
)
CX = (
    ("0", "-3016949328/3125", "3925293412889/31250", "-315920718241/6250", "410082261313/62500", "-4859926311/12500", "29183151/2500", "-4322/25", "1"),
    ("48271189248/3125", "-32554037377816/15625", "19024674172661/31250", "-116858962492/3125", "-4944502477/6250", "78866357/625", "-444266/125", "786/25", "0"),
    ("118119041994672/390625", "218825704369549/31250", "-1628209078050351/781250", "24840599510927/156250", "-20682996319/12500", "-647480389/3125", "4380333/625", "-312/5", "0"),
    ("-570636561473136/390625", "-6749359461879353/781250", "794651282514111/390625", "-14880446763889/156250", "-36988061198/15625", "48458491/250", "-318582/125", "0", "0"),
    ("980677852825824/390625", "1863197504635273/390625", "-144439831610443/156250", "5736968309049/156250", "26987184513/31250", "-315937633/6250", "247839/625", "0", "0"),
    ("-789913089425376/390625", "-95808733158877/78125", "226228514254623/781250", "-1259177102927/78125", "2732915364/15625", "1390428/625", "0", "0", "0"),
    ("293540264356464/390625", "152705311358489/781250", "-42651897368459/781250", "609107362377/156250", "-3267679759/31250", "590096/625", "0", "0", "0"),
    ("-37821406934448/390625", "-13840030176837/781250", "377986454943/78125", "-9381626397/31250", "3540576/625", "0", "0", "0", "0"),
)
CY = (
    ("0", "-1288809792/15625", "60597876882/15625", "-246249337657/12500", "246345620709/62500", "-754682859/2500", "26859791/2500", "-4342/25", "1"),
    ("20620956672/15625", "-5264240621856/78125", "28547368182704/78125", "-6613389982081/156250", "4107920378/15625", "15227937/125", "-2794858/625", "10191/250", "0"),
    ("6278652931968/78125", "-240098071662172/390625", "-652932152553913/781250", "32815526836777/312500", "-29665687223/15625", "-1048066121/6250", "16482201/2500", "-312/5", "0"),
    ("-59961927583872/390625", "1112181291312788/390625", "449869267325923/781250", "-9937608117483/156250", "-10725965407/15625", "450804572/3125", "-1439996/625", "0", "0"),
    ("-758510810673408/1953125", "-8360973992985416/1953125", "-2871838767839/31250", "974565108823/31250", "-8239681301/62500", "-96310742/3125", "10176/25", "0", "0"),
    ("2827722585238272/1953125", "5710819702531544/1953125", "-9205535476859/156250", "-1972122788511/156250", "4290414752/15625", "2966208/3125", "0", "0", "0"),
    ("-3367757488007808/1953125", "-1801214735526316/1953125", "3957829549436/78125", "6639541174/3125", "-1620729152/15625", "23552/25", "0", "0", "0"),
    ("1850723490483072/1953125", "235934676676004/1953125", "-4122192150876/390625", "-4024869248/78125", "13142016/3125", "0", "0", "0", "0"),
    ("-437038196779008/1953125", "-14342187792576/1953125", "547701173056/390625", "-327867392/15625", "0", "0", "0", "0", "0"),
    ("5025222955008/390625", "225511122816/390625", "-927148032/15625", "0", "0", "0", "0", "0", "0"),
)
