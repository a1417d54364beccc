from typing import List

from desgraph.menu.models import MenuEntry


class MENU:
    bibd = MenuEntry("bibd", ("t", "k", "r", "seed"), "Balanced Incomplete Block Design")
    crd = MenuEntry("crd", ("t", "n", "r", "seed"), "Completely Randomised Design")
    factorial = MenuEntry("factorial", ("trt", "r", "design", "seed"), "Factorial Design")
    graeco = MenuEntry("graeco", ("t", "seed"), "Graeco-Latin Square Design")
    hyper_graeco = MenuEntry("hyper_graeco", ("t", "seed"), "Hyper-Graeco-Latin Square Design")
    lsd = MenuEntry("lsd", ("t", "seed"), "Latin Square Design")
    rcbd = MenuEntry("rcbd", ("t", "r", "seed"), "Randomised Complete Block Design")
    split = MenuEntry("split", ("t1", "t2", "r", "seed"), "Split-Plot Design, Split-Unit Design")
    strip = MenuEntry("strip", ("t1", "t2", "r", "seed"), "Strip-Plot Design, Strip-Unit Design")
    youden = MenuEntry("youden", ("nc", "t", "seed"), "Youden Square Design")


def entries() -> List[MenuEntry]:
    return sorted(
        (value for value in vars(MENU).values() if isinstance(value, MenuEntry)),
        key=lambda entry: entry.name,
    )
