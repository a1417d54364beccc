from desgraph.exceptions.exceptions import DesignError


class UnknownKindError(DesignError):
    """
    No recipe with this name on the menu
    """

    kind_name: str


class InvalidParamsError(DesignError):
    """
    Recipe parameters are unknown, out of range or admit no design
    """

    recipe: str
