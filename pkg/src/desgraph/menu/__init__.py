from desgraph.menu.catalogue import MENU, entries
from desgraph.menu.core import menu, scan_menu, takeout
from desgraph.menu.exceptions import InvalidParamsError, UnknownKindError
from desgraph.menu.models import MenuEntry, Recipe
from desgraph.menu.recipes import RECIPES
